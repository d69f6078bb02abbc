#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "mutrank/bayes.hpp"
#include "mutrank/pipeline.hpp"

using namespace mutrank;
using namespace mutrank::cli;
using nlohmann::json;

namespace {

// Writes the worked-example fault into dir and returns (matrix, snapshot) paths.
std::pair<std::filesystem::path, std::filesystem::path> write_fixture_fault(
    const std::filesystem::path& dir,
    std::initializer_list<std::string> failing = {"t1", "t2"},
    std::initializer_list<std::string> passing = {"t3", "t4"}) {
  std::filesystem::create_directories(dir);
  save_kill_matrix(fixtures::fixture_matrix(), dir / "matrix.csv", MatrixFormat::Csv);
  save_failure_snapshot(fixtures::snap(failing, passing), dir / "snapshot.json");
  return {dir / "matrix.csv", dir / "snapshot.json"};
}

struct Captured {
  int code = -1;
  std::string out;
  std::string err;
};

Captured run_rank(const RankCommand& cmd) {
  std::ostringstream out, err;
  int code = cmd_rank(cmd, out, err);
  return {code, out.str(), err.str()};
}

Captured run_eval(const EvalCommand& cmd) {
  std::ostringstream out, err;
  int code = cmd_eval(cmd, out, err);
  return {code, out.str(), err.str()};
}

Captured run_reduce(const ReduceCommand& cmd) {
  std::ostringstream out, err;
  int code = cmd_reduce(cmd, out, err);
  return {code, out.str(), err.str()};
}

Captured run_synth(const SynthCommand& cmd) {
  std::ostringstream out, err;
  int code = cmd_synth(cmd, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("model names round-trip") {
    for (Model m : {Model::EmF, Model::EmFp, Model::PmMultF, Model::PmAddF, Model::PmMultFp,
                    Model::PmAddFp, Model::PcFp, Model::LrF, Model::LrFp, Model::MlpF,
                    Model::MlpFp})
      CHECK(model_from_string(to_string(m)) == m);
    CHECK_FALSE(model_from_string("nonsense").has_value());
    CHECK(is_classifier(Model::LrF));
    CHECK(is_classifier(Model::MlpFp));
    CHECK_FALSE(is_classifier(Model::PcFp));
  }

  TEST_CASE("resolve validates and fills defaults") {
    RunConfig cfg;
    SUBCASE("epsilon range") {
      cfg.epsilon = 0.0;
      CHECK_THROWS_AS(resolve(cfg), UsageError);
      cfg.epsilon = 1.0;
      CHECK_THROWS_AS(resolve(cfg), UsageError);
    }
    SUBCASE("classifier settings need a classifier model") {
      cfg.model = Model::PmAddF;
      cfg.classifier.emplace();
      CHECK_THROWS_AS(resolve(cfg), UsageError);
    }
    SUBCASE("classifier models gain resolved defaults") {
      cfg.model = Model::MlpFp;
      cfg.seed = 99;
      auto resolved = resolve(cfg);
      REQUIRE(resolved.classifier.has_value());
      CHECK(resolved.classifier->kind == classify::ClassifierKind::Mlp);
      CHECK(resolved.classifier->seed == 99);
      CHECK(resolved.classifier->hidden_units == 50);
      CHECK(resolved.classifier->epochs == 500);
    }
    SUBCASE("bad classifier settings become usage errors") {
      cfg.model = Model::LrF;
      cfg.classifier.emplace();
      cfg.classifier->epochs = 0;
      CHECK_THROWS_AS(resolve(cfg), UsageError);
    }
    SUBCASE("sampling inherits the run seed and validates") {
      cfg.sampling.emplace();
      cfg.sampling->kind = reduce::SamplingSpec::Kind::Uniform;
      cfg.sampling->rate = 0.5;
      cfg.seed = 7;
      CHECK(resolve(cfg).sampling->seed == 7);
      cfg.sampling->rate = 0.0;
      CHECK_THROWS_AS(resolve(cfg), UsageError);
      cfg.sampling->kind = reduce::SamplingSpec::Kind::Stratified;
      cfg.sampling->cap_n = 0;
      CHECK_THROWS_AS(resolve(cfg), UsageError);
    }
  }

  TEST_CASE("matrix format inference") {
    CHECK(matrix_format_of("a/b/matrix.csv") == MatrixFormat::Csv);
    CHECK(matrix_format_of("m.json") == MatrixFormat::Json);
    CHECK_THROWS_AS(matrix_format_of("matrix.txt"), UsageError);
    CHECK_THROWS_AS(matrix_format_of("matrix"), UsageError);
  }

  TEST_CASE("reductions honour coverage availability") {
    auto km = fixtures::fixture_matrix();
    RunConfig cfg;
    SUBCASE("no coverage set means no coverage stage") {
      auto out = apply_reductions(km, fixtures::snap({"t1"}), cfg);
      CHECK(out == km);
    }
    SUBCASE("coverage set prunes methods") {
      auto snap = fixtures::snap_covered({"t1"}, {}, {fixtures::kGetType});
      auto out = apply_reductions(km, snap, cfg);
      CHECK(out.by_method().size() == 1);
    }
    SUBCASE("coverage filtering can be disabled") {
      auto snap = fixtures::snap_covered({"t1"}, {}, {fixtures::kGetType});
      cfg.coverage_filter = false;
      CHECK(apply_reductions(km, snap, cfg) == km);
    }
  }

  TEST_CASE("score_with_model dispatches to the scorers") {
    auto km = fixtures::fixture_matrix();
    auto snap = fixtures::snap({"t1", "t2"}, {"t3", "t4"});
    RunConfig cfg;
    cfg.model = Model::PmAddF;
    CHECK(score_with_model(km, snap, cfg) == bayes::score_pm_add_f(km, snap));
    cfg.model = Model::EmF;
    CHECK(score_with_model(km, snap, cfg) == bayes::score_em_f(km, snap));
    cfg.model = Model::LrFp;
    auto sv = score_with_model(km, snap, resolve(cfg));
    REQUIRE(sv.size() == 2);
    double total = 0.0;
    for (const auto& [method, score] : sv) total += score.real_value();
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("rank command emits json with config echo") {
    fixtures::TempDir dir("rankjson");
    auto [matrix, snapshot] = write_fixture_fault(dir.path());
    RankCommand cmd;
    cmd.matrix_path = matrix;
    cmd.snapshot_path = snapshot;
    cmd.config.model = Model::PmAddF;
    cmd.config.output = OutputFormat::Json;

    auto r = run_rank(cmd);
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());
    json j = json::parse(r.out);
    CHECK(j["config"]["model"] == "pm_add_f");
    CHECK(j["config"]["classifier"].is_null());
    REQUIRE(j["ranking"].size() == 2);
    // Both methods score 3 on failing {t1,t2}: a full tie at rank 2.
    CHECK(j["ranking"][0]["method"] == fixtures::kGetType);
    CHECK(j["ranking"][0]["score"] == 3);
    CHECK(j["ranking"][0]["rank"] == 2);
    CHECK(j["ranking"][1]["rank"] == 2);

    SUBCASE("reruns are byte-identical") {
      auto again = run_rank(cmd);
      CHECK(again.out == r.out);
    }
    SUBCASE("table format carries the same ranking") {
      cmd.config.output = OutputFormat::Table;
      auto table = run_rank(cmd);
      REQUIRE(table.code == 0);
      CHECK(table.out.find("# config: ") == 0);
      CHECK(table.out.find("rank  method") != std::string::npos);
      CHECK(table.out.find(fixtures::kGetType) != std::string::npos);
    }
  }

  TEST_CASE("rank command writes to a file when asked") {
    fixtures::TempDir dir("rankout");
    auto [matrix, snapshot] = write_fixture_fault(dir.path());
    RankCommand cmd;
    cmd.matrix_path = matrix;
    cmd.snapshot_path = snapshot;
    cmd.config.output = OutputFormat::Json;
    cmd.out_path = dir.path() / "ranking.json";
    auto r = run_rank(cmd);
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(*cmd.out_path);
    REQUIRE(in.good());
    json j = json::parse(in);
    CHECK(j["ranking"].size() == 2);
  }

  TEST_CASE("rank command exit codes") {
    fixtures::TempDir dir("rankerr");
    auto [matrix, snapshot] = write_fixture_fault(dir.path());
    RankCommand cmd;
    cmd.matrix_path = matrix;
    cmd.snapshot_path = snapshot;

    SUBCASE("missing matrix file is a pipeline failure") {
      cmd.matrix_path = dir.path() / "missing.csv";
      auto r = run_rank(cmd);
      CHECK(r.code == 1);
      CHECK(r.err.rfind("error in load:", 0) == 0);
    }
    SUBCASE("unknown extension is a usage error") {
      cmd.matrix_path = dir.path() / "matrix.bin";
      auto r = run_rank(cmd);
      CHECK(r.code == 2);
      CHECK(r.err.rfind("usage error:", 0) == 0);
    }
    SUBCASE("bad epsilon is a usage error") {
      cmd.config.epsilon = 2.0;
      auto r = run_rank(cmd);
      CHECK(r.code == 2);
    }
    SUBCASE("model io flags need a classifier model") {
      cmd.save_model_path = dir.path() / "m.json";
      auto r = run_rank(cmd);
      CHECK(r.code == 2);
    }
    SUBCASE("snapshot naming an unknown test fails in scoring's stage chain") {
      save_failure_snapshot(fixtures::snap({"zz"}), dir.path() / "bad.json");
      cmd.snapshot_path = dir.path() / "bad.json";
      auto r = run_rank(cmd);
      CHECK(r.code == 1);
      CHECK(r.err.rfind("error in scoring:", 0) == 0);
    }
  }

  TEST_CASE("classifier models save and reload through the rank command") {
    fixtures::TempDir dir("rankmodel");
    auto [matrix, snapshot] = write_fixture_fault(dir.path());
    RankCommand cmd;
    cmd.matrix_path = matrix;
    cmd.snapshot_path = snapshot;
    cmd.config.model = Model::LrFp;
    cmd.config.output = OutputFormat::Json;
    cmd.save_model_path = dir.path() / "model.json";
    auto first = run_rank(cmd);
    REQUIRE(first.code == 0);
    REQUIRE(std::filesystem::exists(*cmd.save_model_path));

    RankCommand reload = cmd;
    reload.save_model_path.reset();
    reload.load_model_path = dir.path() / "model.json";
    reload.matrix_path = dir.path() / "ignored.csv";  // not read when loading a model
    auto second = run_rank(reload);
    REQUIRE(second.code == 0);
    CHECK(json::parse(second.out)["ranking"] == json::parse(first.out)["ranking"]);
  }

  TEST_CASE("eval command aggregates a synthetic corpus") {
    fixtures::TempDir dir("evalcorpus");
    SynthCommand synth_cmd;
    synth_cmd.out_dir = dir.path();
    synth_cmd.n_faults = 4;
    synth_cmd.spec.n_methods = 5;
    synth_cmd.spec.mutants_per_method_min = 2;
    synth_cmd.spec.mutants_per_method_max = 3;
    synth_cmd.spec.n_tests = 8;
    synth_cmd.spec.n_failing = 2;
    synth_cmd.spec.coupling = 0.9;
    synth_cmd.spec.noise = 0.05;
    synth_cmd.spec.seed = 11;
    REQUIRE(run_synth(synth_cmd).code == 0);

    EvalCommand cmd;
    cmd.corpus_dir = dir.path();
    cmd.config.model = Model::PmAddF;
    cmd.config.output = OutputFormat::Json;
    auto r = run_eval(cmd);
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["n_faults"] == 4);
    CHECK(j["warnings"] == 0);
    CHECK(j["acc"].contains("1"));
    CHECK(j["acc"].contains("10"));
    CHECK(j["wef_per_fault"].size() == 4);
    double map_score = j["map_score"].get<double>();
    CHECK(map_score >= 0.0);
    CHECK(map_score <= 1.0);

    SUBCASE("table format summarises the same data") {
      cmd.config.output = OutputFormat::Table;
      auto t = run_eval(cmd);
      REQUIRE(t.code == 0);
      CHECK(t.out.find("faults: 4 (skipped: 0)") != std::string::npos);
      CHECK(t.out.find("acc@1:") != std::string::npos);
      CHECK(t.out.find("map:") != std::string::npos);
    }
    SUBCASE("a broken fault becomes a warning, not a failure") {
      std::ofstream bad(dir.path() / "fault_002" / "snapshot.json");
      bad << "not json";
      bad.close();
      auto t = run_eval(cmd);
      REQUIRE(t.code == 0);
      json jj = json::parse(t.out);
      CHECK(jj["n_faults"] == 3);
      CHECK(jj["warnings"] == 1);
      CHECK(t.err.find("warning: skipping fault_002") != std::string::npos);
    }
  }

  TEST_CASE("eval command usage errors") {
    fixtures::TempDir dir("evalbad");
    EvalCommand cmd;
    cmd.corpus_dir = dir.path() / "nope";
    CHECK(run_eval(cmd).code == 2);
    cmd.corpus_dir = dir.path();  // exists but holds no faults
    CHECK(run_eval(cmd).code == 2);
  }

  TEST_CASE("reduce command reports retention and writes the graph") {
    fixtures::TempDir dir("reducecmd");
    auto [matrix, snapshot] = write_fixture_fault(dir.path());
    (void)snapshot;
    ReduceCommand cmd;
    cmd.matrix_path = matrix;
    cmd.out_path = dir.path() / "reduced.csv";
    cmd.subsuming_only = true;
    cmd.graph_path = dir.path() / "graph.dot";
    auto r = run_reduce(cmd);
    REQUIRE(r.code == 0);
    CHECK(r.out == "mutants retained: 2 of 5 (removed 3)\n");
    auto reduced = load_kill_matrix(cmd.out_path, MatrixFormat::Csv);
    CHECK(reduced.mutant_count() == 2);
    std::ifstream in(*cmd.graph_path);
    std::string dot((std::istreambuf_iterator<char>(in)), {});
    CHECK(dot.rfind("digraph subsumption {", 0) == 0);
    CHECK(dot.find("style=bold") != std::string::npos);

    SUBCASE("format conversion falls out of the extensions") {
      ReduceCommand conv;
      conv.matrix_path = matrix;
      conv.out_path = dir.path() / "converted.json";
      REQUIRE(run_reduce(conv).code == 0);
      CHECK(load_kill_matrix(conv.out_path, MatrixFormat::Json) ==
            load_kill_matrix(matrix, MatrixFormat::Csv));
    }
    SUBCASE("bad sampling rate is a usage error") {
      ReduceCommand bad;
      bad.matrix_path = matrix;
      bad.out_path = dir.path() / "x.csv";
      bad.sampling.emplace();
      bad.sampling->rate = 0.0;
      CHECK(run_reduce(bad).code == 2);
    }
  }

  TEST_CASE("synth command writes deterministic fault trees") {
    fixtures::TempDir a("syntha"), b("synthb");
    SynthCommand cmd;
    cmd.n_faults = 3;
    cmd.spec.n_methods = 4;
    cmd.spec.mutants_per_method_min = 1;
    cmd.spec.mutants_per_method_max = 2;
    cmd.spec.n_tests = 6;
    cmd.spec.n_failing = 2;
    cmd.spec.seed = 5;
    cmd.out_dir = a.path();
    auto ra = run_synth(cmd);
    REQUIRE(ra.code == 0);
    CHECK(ra.out == "faults written: 3\n");
    cmd.out_dir = b.path();
    REQUIRE(run_synth(cmd).code == 0);

    for (const char* fault : {"fault_000", "fault_001", "fault_002"}) {
      for (const char* file : {"matrix.csv", "tests.txt", "snapshot.json", "truth.json"}) {
        auto pa = a.path() / fault / file;
        auto pb = b.path() / fault / file;
        REQUIRE(std::filesystem::exists(pa));
        std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
        std::string ca((std::istreambuf_iterator<char>(fa)), {});
        std::string cb((std::istreambuf_iterator<char>(fb)), {});
        CHECK(ca == cb);
      }
    }
    // Faults derive distinct seeds from the master seed.
    std::ifstream f0(a.path() / "fault_000" / "matrix.csv", std::ios::binary);
    std::ifstream f1(a.path() / "fault_001" / "matrix.csv", std::ios::binary);
    std::string c0((std::istreambuf_iterator<char>(f0)), {});
    std::string c1((std::istreambuf_iterator<char>(f1)), {});
    CHECK(c0 != c1);

    SUBCASE("invalid spec is a usage error") {
      cmd.spec.n_tests = 0;
      CHECK(run_synth(cmd).code == 2);
      cmd.spec.n_tests = 6;
      cmd.n_faults = 0;
      CHECK(run_synth(cmd).code == 2);
    }
  }
}
