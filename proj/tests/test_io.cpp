#include <doctest.h>

#include <filesystem>

#include "qfilter/errors.hpp"
#include "qfilter/io.hpp"
#include "support.hpp"

using namespace qfilter;
using namespace qfilter::io;
using qtest::max_abs;

TEST_CASE("complex numbers and matrices") {
  CHECK(to_json(cplx{1.5, -2.0}).dump() == "[1.5,-2.0]");
  CHECK(complex_from_json(json::parse("[0.5, 3]")) == cplx{0.5, 3.0});
  CHECK(complex_from_json(json::parse("2")) == cplx{2.0, 0.0});
  CHECK_THROWS_AS(complex_from_json(json::parse("[1, 2, 3]")), ConfigError);
  CHECK_THROWS_AS(complex_from_json(json::parse("\"x\"")), ConfigError);

  Rng rng = stream_for(61, 0);
  const Eigen::MatrixXcd m = random_complex_matrix(3, 2, rng);
  CHECK(matrix_from_json(parse_json(matrix_to_json(m).dump())) == m);

  const auto mixed = matrix_from_json(json::parse("[[1, [0, 1]], [0, -1]]"));
  CHECK(mixed(0, 1) == cplx{0, 1});
  CHECK(mixed(1, 1) == cplx{-1, 0});
  CHECK_THROWS_AS(matrix_from_json(json::parse("[[1, 2], [3]]")), ShapeError);
  CHECK_THROWS_AS(matrix_from_json(json::parse("5")), ConfigError);

  const auto a = matrix_from_json(json::parse(R"({"annihilation": 4, "scale": [2, 0]})"));
  CHECK(max_abs(a - 2.0 * hilbert::annihilation(4)) == 0.0);
  CHECK(matrix_from_json(json::parse(R"({"number": 3})")) == hilbert::number_operator(3));
  CHECK_THROWS_AS(matrix_from_json(json::parse(R"({"squeeze": 3})")), ConfigError);
}

TEST_CASE("malformed JSON reports line and column") {
  const std::string text = "{\n  \"dim\": 8,\n  \"n0\": ,\n}";
  try {
    parse_json(text, "cfg.json");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("cfg.json:3:") == 0);
  }
}

TEST_CASE("simulation config round trip and validation") {
  ensemble::SimulationConfig c;
  c.r2 = 0.25;
  c.filter_kind = ensemble::FilterKind::kuramochi;
  c.seed = 18446744073709551615ull;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.seed == c.seed);

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"dimm": 8})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"dim": "eight"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"seed": -3})")), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"dim": 6, "n0": 5})")),
                       doctest::Contains("truncation margin"), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"mode": "filter-from-records"})")), ConfigError);

  json j = config_to_json(c);
  apply_overrides(j, {"r2=0.75", "filter_kind=sme", "n_traj=12"});
  const auto over = config_from_json(j);
  CHECK(over.r2 == 0.75);
  CHECK(over.filter_kind == ensemble::FilterKind::sme);
  CHECK(over.n_traj == 12);
  CHECK_THROWS_AS(apply_overrides(j, {"r2"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"=3"}), ConfigError);
}

TEST_CASE("measurement specs and reports") {
  const auto spec = measurement_from_json(
      json::parse(R"({"F": [[[1,0],[0,0]],[[0,0],[0,0]]], "G": [[0,0],[0,1]]})"));
  CHECK(spec.F(0, 0) == cplx{1, 0});
  CHECK(spec.G(1, 1) == cplx{1, 0});
  const auto report = report_to_json(commute::check_self_commutative(spec));
  CHECK(report["commutative"] == true);
  CHECK(report["violation_norms"].size() == 3);
  CHECK_THROWS_AS(measurement_from_json(json::parse(R"({"F": [[1, 0]], "G": [[1, 0]]})")), ShapeError);
  CHECK_THROWS_AS(measurement_from_json(json::parse(R"({"F": [[1]]})")), ConfigError);
}

TEST_CASE("SLH serialization and composition") {
  Rng rng = stream_for(62, 0);
  network::SLHModel g{random_unitary(2, rng),
                      {random_complex_matrix(3, 3, rng), random_complex_matrix(3, 3, rng)},
                      random_hermitian(3, rng)};
  const auto back = slh_from_json(parse_json(slh_to_json(g).dump()));
  CHECK(back.S == g.S);
  CHECK(back.L[1] == g.L[1]);
  CHECK(back.H == g.H);

  const auto composite = compose_from_json(json::parse(R"({
    "components": {
      "cavity": {"S": [[1]], "L": [{"annihilation": 4, "scale": 0.5}], "H": {"number": 4}},
      "vacuum": {"passthrough": {"channels": 1, "dim": 4}},
      "splitter": {"beam_splitter": {"r": 0.6, "theta": 0.2, "dim": 4}}
    },
    "expression": {"series": [{"concatenate": ["cavity", "vacuum"]}, "splitter"]}
  })"));
  const auto S_bs = network::beam_splitter(0.6, 0.2).S;
  CHECK(max_abs(composite.S - S_bs) == 0.0);
  CHECK(max_abs(composite.L[0] - S_bs(0, 0) * 0.5 * hilbert::annihilation(4)) < 1e-15);
  CHECK(max_abs(composite.L[1] - S_bs(1, 0) * 0.5 * hilbert::annihilation(4)) < 1e-15);
  CHECK(max_abs(composite.H - hilbert::number_operator(4)) == 0.0);

  const json echo_doc = json::parse(R"({
    "components": {"g": {"S": [[1]], "L": [[[0, 1], [0, 0]]], "H": [[1, 0], [0, -1]]},
                   "id": {"passthrough": {"channels": 1, "dim": 2}}},
    "expression": {"series": ["id", "g"]}
  })");
  const auto echoed = compose_from_json(echo_doc);
  CHECK(slh_to_json(echoed) == slh_to_json(slh_from_json(echo_doc["components"]["g"])));

  CHECK_THROWS_AS(compose_from_json(json::parse(R"({
    "components": {"one": {"passthrough": {"channels": 1, "dim": 2}},
                   "two": {"passthrough": {"channels": 2, "dim": 2}}},
    "expression": {"series": ["one", "two"]}})")),
                  ShapeError);
  CHECK_THROWS_AS(compose_from_json(json::parse(R"({"expression": "missing"})")), ConfigError);
  CHECK_THROWS_AS(compose_from_json(json::parse(R"({"expression": {"series": []}})")), ConfigError);
  CHECK_THROWS_AS(slh_from_json(json::parse(R"({"S": [[2]], "L": [[[0]]], "H": [[0]]})")), ConfigError);
}

TEST_CASE("CSV output embeds the config") {
  ensemble::SimulationConfig c;
  c.dim = 5;
  c.n0 = 2;
  c.t_final = 0.01;
  c.dt = 1e-3;
  c.n_traj = 3;
  const auto summary = ensemble::run_ensemble(c);
  const std::string csv = ensemble_csv(summary);
  CHECK(csv.rfind("# config={", 0) == 0);
  CHECK(csv.find("\nt,mean_N,stderr_N,analytic_N\n") != std::string::npos);

  const auto meta = ensemble_metadata(summary, csv);
  CHECK(meta["config"] == config_to_json(c));
  CHECK(meta["content_sha1"] == git_blob_sha1(csv));
  CHECK(meta["content_sha1"].get<std::string>().size() == 40);
  CHECK(meta.contains("leakage_max"));
  CHECK(meta["jumps"].contains("histogram"));
}

TEST_CASE("records CSV round trip") {
  ensemble::SimulationConfig c;
  c.dim = 5;
  c.n0 = 2;
  c.t_final = 0.2;
  const auto traj = ensemble::run_trajectory(c, 0, {false, true});
  const auto path = std::filesystem::temp_directory_path() / "qfilter_records_test.csv";
  write_text(path, records_csv(c, traj.records));
  const auto records = read_records_csv(path);
  REQUIRE(records.size() == traj.records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    CHECK(records[k].dY1 == traj.records[k].dY1);
    CHECK(records[k].dN == traj.records[k].dN);
  }
  write_text(path, "t,dY1,dN\n0.001,0.1,x\n");
  CHECK_THROWS_AS(read_records_csv(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_records_csv(path), ConfigError);
}

TEST_CASE("git-style content hash") {
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}
