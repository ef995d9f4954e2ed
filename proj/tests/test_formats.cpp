#include "qsn/csv.hpp"
#include "qsn/experiments.hpp"
#include "qsn/manifest.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

using namespace qsn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("qsn_fmt_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("doubles format with 12 significant digits") {
    CHECK(csv::format_double(1.0 / 3.0) == "0.333333333333");
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(-2.0) == "-2");
    CHECK(csv::format_double(1e-20) == "1e-20");
    CHECK(csv::format_double(123456789.123) == "123456789.123");
}

TEST_CASE("tables serialize with header and newline endings") {
    csv::Table t;
    t.header = {"a", "b"};
    t.add_row({"1", "2"});
    t.add_row({"3", "4"});
    CHECK(t.to_string() == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(t.add_row({"only-one"}), std::invalid_argument);
}

TEST_CASE("atomic writes leave no temporary behind") {
    TempDir tmp;
    const fs::path target = tmp.path / "data.csv";
    csv::write_file_atomic(target, "x\n1\n");
    CHECK(manifest::read_file(target) == "x\n1\n");
    CHECK(!fs::exists(tmp.path / "data.csv.tmp"));
}

TEST_CASE("FNV-1a digest matches the reference vector") {
    CHECK(manifest::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(manifest::digest_string("abc") == "fnv1a64:e71fa2190541574b");
}

TEST_CASE("documents round-trip through parse and serialize") {
    const std::string text = "# comment\n  j = 1.5 \n\nsigma_z1 = 0.94\nnested.0.key = x\n";
    const auto doc = manifest::parse_document(text);
    CHECK(doc.at("j") == "1.5");
    CHECK(doc.at("sigma_z1") == "0.94");
    CHECK(doc.at("nested.0.key") == "x");
    const auto again = manifest::parse_document(manifest::serialize_document(doc));
    CHECK(again == doc);

    CHECK_THROWS_AS(manifest::parse_document("key-without-equals\n"), std::invalid_argument);
    CHECK_THROWS_AS(manifest::parse_document("= value\n"), std::invalid_argument);
}

TEST_CASE("manifest verification detects content changes") {
    TempDir tmp;
    csv::write_file_atomic(tmp.path / "out.csv", "a\n1\n");

    manifest::RunManifest run;
    run.subcommand = "dynamics";
    run.params = {{"j", "0.5"}};
    run.outputs.push_back({"out.csv", manifest::digest_file(tmp.path / "out.csv"),
                           fs::file_size(tmp.path / "out.csv")});
    manifest::write_manifest(tmp.path / "run.manifest", run);

    auto entries = manifest::verify_manifest(tmp.path / "run.manifest");
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].ok);

    csv::write_file_atomic(tmp.path / "out.csv", "a\n2\n");
    entries = manifest::verify_manifest(tmp.path / "run.manifest");
    CHECK(!entries[0].ok);

    csv::write_file_atomic(tmp.path / "empty.manifest", "manifest_version = 1\n");
    CHECK_THROWS_AS(manifest::verify_manifest(tmp.path / "empty.manifest"), std::invalid_argument);
}

TEST_CASE("experiment tables are byte-identical across repeated threaded runs") {
    experiments::DynamicsArgs dyn;
    dyn.theta_deg = {0.0, 60.0, 120.0};
    dyn.collisions = 200;
    dyn.jobs = 2;
    CHECK(experiments::run_dynamics_experiment(dyn).to_string() ==
          experiments::run_dynamics_experiment(dyn).to_string());

    experiments::ActivationArgs act;
    act.points = 13;
    act.max_collisions = 6000;
    act.jobs = 2;
    CHECK(experiments::run_activation_experiment(act).table.to_string() ==
          experiments::run_activation_experiment(act).table.to_string());

    auto trn = experiments::Presets::train("fig4a");
    trn.max_iters = 300;
    CHECK(experiments::run_training_experiment(trn).history.to_string() ==
          experiments::run_training_experiment(trn).history.to_string());
}

TEST_CASE("training presets pin the figure parameters") {
    const auto fig5 = experiments::Presets::train("fig5");
    CHECK(fig5.j_list == std::vector<double>{1.0});
    CHECK(fig5.sigma_z1.value() == 0.96);
    CHECK(fig5.sigma_z2.value() == -0.64);
    CHECK(fig5.m_des == 0.12);
    CHECK(fig5.eta.value() == 2.4e-5);
    CHECK(fig5.surface);

    const auto fig6 = experiments::Presets::train("fig6");
    CHECK(fig6.j_list.size() == 4);
    CHECK_THROWS_AS(experiments::Presets::train("fig9"), std::invalid_argument);
}

TEST_CASE("activation x-mapping sends the grid onto [-2pi, 2pi]") {
    CHECK(experiments::activation_x(0.0) == Catch::Approx(2.0 * M_PI));
    CHECK(experiments::activation_x(M_PI) == Catch::Approx(-2.0 * M_PI));
    CHECK(experiments::activation_x(M_PI / 2.0) == Catch::Approx(0.0).margin(1e-15));
}
