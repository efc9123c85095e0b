#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pplab/experiment.hpp"

using namespace pplab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pplab_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

constexpr const char* kTorsionConfig = R"(
seed = 7
output = "run"

[domain]
kind = "disk"
center = [0, 0]
radius = 1.0
ngon = 256

[operator]
p = 2.0

[[charge]]
kind = "lebesgue"

[mesh]
levels = [0.0625, 0.03125]

[[task]]
kind = "solve"
oracle = "disk-radial"
oracle_tol = 0.02
)";

} // namespace

TEST_CASE("config parse errors carry line and column") {
    try {
        ConfigFile::parse("a == 1\n", "inline");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.label() == "config-parse");
        CHECK(std::string(e.what()).find("inline:1:") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[unterminated\n", "x"),
                         doctest::Contains("config-parse"), Error);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("key = \n", "x"),
                         doctest::Contains("config-parse"), Error);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("k = 1\nk = 2\n", "x"),
                         doctest::Contains("duplicate"), Error);
}

TEST_CASE("config validation") {
    CHECK_THROWS_WITH_AS(
        ExperimentConfig::from_text("[domain]\nkind = \"square\"\n", "t"),
        doctest::Contains("no [[task]]"), Error);
    CHECK_THROWS_WITH_AS(
        ExperimentConfig::from_text("[domain]\nkind = \"square\"\n[mesh]\nlevels = [0.1, 0.2]\n"
                                    "[[task]]\nkind = \"solve\"\n",
                                    "t"),
        doctest::Contains("strictly decreasing"), Error);
    CHECK_THROWS_WITH_AS(
        ExperimentConfig::from_text("[domain]\nkind = \"square\"\n[[task]]\nkind = \"morrey\"\n",
                                    "t"),
        doctest::Contains("missing required field 'q'"), Error);
}

TEST_CASE("zero-charge solve writes a zero field and exits cleanly") {
    const fs::path dir = fresh_dir("zero");
    const std::string cfg_text = R"(
output = "z"
[domain]
kind = "square"
[mesh]
levels = [0.25]
[[task]]
kind = "solve"
)";
    const ExperimentConfig cfg = ExperimentConfig::from_text(cfg_text, "zero.cfg");
    RunOptions opts;
    opts.output_root = dir.string();
    std::ostringstream log;
    CHECK(run_experiment(cfg, opts, log) == 0);

    const std::string csv = slurp(dir / "z" / "solve0_L0.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "x,y,value");
    int rows = 0;
    while (std::getline(lines, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 25);
}

TEST_CASE("beta-nonpositive propagates as a contract violation") {
    const std::string cfg_text = R"(
output = "q1"
[domain]
kind = "square"
[mesh]
levels = [0.25]
[[task]]
kind = "morrey"
q = 1
mode = "floated"
)";
    const ExperimentConfig cfg = ExperimentConfig::from_text(cfg_text, "q1.cfg");
    RunOptions opts;
    opts.output_root = fresh_dir("q1").string();
    std::ostringstream log;
    CHECK(run_experiment(cfg, opts, log) == 1);
    CHECK(log.str().find("beta-nonpositive") != std::string::npos);
}

TEST_CASE("identical reruns are byte-for-byte identical") {
    const fs::path a = fresh_dir("repro_a");
    const fs::path b = fresh_dir("repro_b");
    const std::string cfg_text = R"(
seed = 42
output = "r"
[domain]
kind = "square"
[operator]
p = 1.5
[[charge]]
kind = "lebesgue"
[mesh]
levels = [0.125]
[[task]]
kind = "solve"
[[task]]
kind = "morrey"
q = inf
mode = "floated"
[[task]]
kind = "embed"
trials = 2
)";
    const ExperimentConfig cfg = ExperimentConfig::from_text(cfg_text, "repro.cfg");
    std::ostringstream log;
    RunOptions oa;
    oa.output_root = a.string();
    RunOptions ob;
    ob.output_root = b.string();
    REQUIRE(run_experiment(cfg, oa, log) == 0);
    REQUIRE(run_experiment(cfg, ob, log) == 0);
    for (const char* name :
         {"solve0_L0.csv", "morrey1_L0.csv", "embed2_L0.csv", "manifest_L0.txt"}) {
        CHECK(slurp(a / "r" / name) == slurp(b / "r" / name));
    }
}

TEST_CASE("manifest and compare") {
    const fs::path dir = fresh_dir("cmp");
    const ExperimentConfig cfg = ExperimentConfig::from_text(kTorsionConfig, "torsion.cfg");
    RunOptions opts;
    opts.output_root = dir.string();
    std::ostringstream log;
    REQUIRE(run_experiment(cfg, opts, log) == 0);

    const std::string m0 = (dir / "run" / "manifest_L0.txt").string();
    const std::string m1 = (dir / "run" / "manifest_L1.txt").string();

    // constants appear exactly once per manifest
    {
        std::istringstream in(slurp(m0));
        std::map<std::string, int> seen;
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find(" = ");
            REQUIRE(eq != std::string::npos);
            ++seen[line.substr(0, eq)];
        }
        for (const auto& [k, count] : seen) {
            CAPTURE(k);
            CHECK(count == 1);
        }
        CHECK(seen.count("solve0_linf_error") == 1);
    }

    // identical manifests compare to all-ones
    const CompareReport self = compare_manifests(m0, m0);
    CHECK(self.flagged == 0);
    for (const CompareRow& row : self.rows) CHECK(row.ratio == doctest::Approx(1.0));

    // refinement: the torsion error ratio shows at least first order
    const CompareReport levels = compare_manifests(m0, m1);
    bool saw_error = false;
    for (const CompareRow& row : levels.rows) {
        if (row.key == "solve0_linf_error") {
            saw_error = true;
            CHECK(row.ratio >= 2.0);
        }
    }
    CHECK(saw_error);

    // different configs are incomparable
    const fs::path dir2 = fresh_dir("cmp2");
    const ExperimentConfig other = ExperimentConfig::from_text(
        "output = \"run\"\n[domain]\nkind = \"square\"\n[mesh]\nlevels = [0.25]\n"
        "[[task]]\nkind = \"solve\"\n",
        "other.cfg");
    RunOptions o2;
    o2.output_root = dir2.string();
    REQUIRE(run_experiment(other, o2, log) == 0);
    CHECK_THROWS_WITH_AS(
        compare_manifests(m0, (dir2 / "run" / "manifest_L0.txt").string()),
        doctest::Contains("incomparable"), Error);
}

TEST_CASE("threaded runs produce the same files as sequential runs") {
    const fs::path a = fresh_dir("seq");
    const fs::path b = fresh_dir("par");
    const ExperimentConfig cfg = ExperimentConfig::from_text(kTorsionConfig, "torsion.cfg");
    std::ostringstream log;
    RunOptions oa;
    oa.output_root = a.string();
    oa.deterministic = true;
    RunOptions ob;
    ob.output_root = b.string();
    ob.threads = 2;
    REQUIRE(run_experiment(cfg, oa, log) == 0);
    REQUIRE(run_experiment(cfg, ob, log) == 0);
    for (const char* name : {"solve0_L0.csv", "solve0_L1.csv", "manifest_L0.txt",
                             "manifest_L1.txt"})
        CHECK(slurp(a / "run" / name) == slurp(b / "run" / name));
}

TEST_CASE("domain files round-trip through the loader") {
    const fs::path dir = fresh_dir("domfile");
    const fs::path file = dir / "dom.txt";
    {
        std::ofstream out(file);
        out << "# unit square with a hole, gamma on the bottom edge\n";
        out << "vertex 0 0\nvertex 2 0\nvertex 2 2\nvertex 0 2\n";
        out << "hole 0.5 0.5 1.0 1.5\n";
        out << "gamma 0\n";
    }
    const Domain2D dom = load_domain_file(file.string());
    CHECK(dom.area() == doctest::Approx(4.0 - 0.5).epsilon(1e-12));
    CHECK(!dom.gamma_empty());
    CHECK(dom.distance_to_gamma({1.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-12));

    {
        std::ofstream out(file);
        out << "vertex 0 0\nvortex 1 0\n";
    }
    CHECK_THROWS_WITH_AS(load_domain_file(file.string()), doctest::Contains("config-parse"),
                         Error);
}
