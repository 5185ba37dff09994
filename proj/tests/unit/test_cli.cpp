#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "chemrep/app/commands.hpp"
#include "chemrep/errors.hpp"
#include "chemrep/field_io.hpp"

using namespace chemrep;
using namespace chemrep::app;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                ("chemrep_cli_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

RunConfig parse(const std::string& text, const fs::path& base = ".") {
    std::istringstream in(text);
    return parse_config(in, base);
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::invalid_argument;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

struct Outcome {
    int code;
    std::string log;
    std::string err;
};

Outcome invoke(Command cmd, const fs::path& config, const fs::path& out, bool check_gradient = false,
               std::optional<std::string> mms_problem = std::nullopt) {
    Invocation inv;
    inv.command = cmd;
    inv.config = config;
    inv.out = out;
    inv.check_gradient = check_gradient;
    inv.mms_problem = std::move(mms_problem);
    std::ostringstream log, err;
    const int code = run(inv, log, err);
    return {code, log.str(), err.str()};
}

}  // namespace

TEST(Config, ReferenceParsesToDefaults) {
    const RunConfig a = parse(config_reference());
    const RunConfig b = default_config();
    EXPECT_EQ(a.scenario.params.p, b.scenario.params.p);
    EXPECT_EQ(a.scenario.N, b.scenario.N);
    EXPECT_EQ(a.scenario.cells, b.scenario.cells);
    EXPECT_EQ(a.scenario.u0_spec, b.scenario.u0_spec);
    EXPECT_EQ(a.cost.gamma_v, b.cost.gamma_v);
    EXPECT_EQ(a.cost.f_min, -infinity);
    EXPECT_EQ(a.cost.target_spec, b.cost.target_spec);
    EXPECT_EQ(a.verify.gradient_tol, b.verify.gradient_tol);
    EXPECT_EQ(a.mms_problems.size(), 4u);
    EXPECT_FALSE(a.command.has_value());
}

TEST(Config, StructDefaultsMatchReference) {
    const RunConfig s;
    const RunConfig d = default_config();
    EXPECT_EQ(s.scenario.T, d.scenario.T);
    EXPECT_EQ(s.scenario.N, d.scenario.N);
    EXPECT_EQ(s.scenario.u0_spec, d.scenario.u0_spec);
    EXPECT_EQ(s.scenario.v0_spec, d.scenario.v0_spec);
    EXPECT_EQ(s.cost.gamma_v, d.cost.gamma_v);
    EXPECT_EQ(s.cost.gamma_f, d.cost.gamma_f);
    EXPECT_EQ(s.cost.s_init, d.cost.s_init);
    EXPECT_EQ(s.cost.max_iters, d.cost.max_iters);
    EXPECT_EQ(s.snapshot_stride, d.snapshot_stride);
}

TEST(Config, ValuesAndLists) {
    const RunConfig c = parse(
        "[run]\ncommand = optimize\nseed = 42\n"
        "[scenario]\np = 2.5\nlogistic = yes\nr = 1\nmu = 0.5\ndim = 2\ncells = 8, 6\n"
        "lengths = 2 1\ncontrol_box = 0 0.5 0 1\ndrift_scheme = central\n"
        "eps_sweep = 0.1 0.05\n"
        "[cost]\nf_min = -1\nf_max = inf\n[mms]\nproblems = a11\ndims = 2\n");
    EXPECT_EQ(c.command, Command::optimize);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.scenario.params.p, 2.5);
    EXPECT_TRUE(c.scenario.params.logistic);
    EXPECT_EQ(c.scenario.params.drift_scheme, DriftScheme::central);
    EXPECT_EQ(c.scenario.cells, (std::vector<int>{8, 6}));
    EXPECT_EQ(c.eps_sweep, (std::vector<double>{0.1, 0.05}));
    EXPECT_EQ(c.cost.f_min, -1.0);
    EXPECT_EQ(c.cost.f_max, infinity);
    EXPECT_EQ(c.mms_problems, std::vector<MmsProblem>{MmsProblem::a11});
    const GridPtr g = make_grid(c.scenario);
    EXPECT_EQ(g->cells(0), 8);
    EXPECT_EQ(g->spacing(0), 0.25);
    // Centres with x <= 0.5: the first two of eight rows, six cells each.
    EXPECT_EQ(g->control_count(), 12u);
}

TEST(Config, Rejections) {
    auto err = [](const std::string& text) { return kind_of([&] { parse(text); }); };
    EXPECT_EQ(err("[scenario]\nbogus = 1\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[nowhere]\np = 1\n"), ErrorKind::config_error);
    EXPECT_EQ(err("p = 2\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\np = two\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\nN = 1.5\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\np = 1\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\nr = 1\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\ndim = 2\ncells = 4 4 4\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\ncontrol_box = 0 1 2\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\ndrift_scheme = sideways\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[run]\ncommand = dance\n"), ErrorKind::config_error);
    EXPECT_EQ(err("[scenario]\neps_sweep = 0.1 0\n"), ErrorKind::config_error);
    EXPECT_EQ(kind_of([] { load_config("/nonexistent/chemrep.ini"); }), ErrorKind::config_error);
}

TEST(Config, FieldSpecs) {
    TempDir dir;
    const std::array<double, 2> len{1.0, 1.0};
    const std::array<int, 2> cells{4, 5};
    const GridPtr g = build_grid(2, len, cells);
    EXPECT_EQ(make_field("constant(2.5)", g, dir.path()).values, std::vector<double>(20, 2.5));
    EXPECT_EQ(make_field("-0.5", g, dir.path()).values, std::vector<double>(20, -0.5));

    const Field gs = make_field("gaussian(0.5, 0.5, 0.2, 2, 1)", g, dir.path());
    for (std::size_t i = 0; i < g->size(); ++i) {
        const auto x = g->center(i);
        const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
        EXPECT_DOUBLE_EQ(gs[i], 1.0 + 2.0 * std::exp(-r2 / 0.04));
    }

    Field stored(g);
    for (std::size_t i = 0; i < stored.size(); ++i) stored[i] = 0.1 * static_cast<double>(i);
    write_field(dir / "field.txt", stored);
    EXPECT_EQ(make_field("field.txt", g, dir.path()).values, stored.values);

    auto err = [&](const std::string& spec) {
        return kind_of([&] { make_field(spec, g, dir.path()); });
    };
    EXPECT_EQ(err("gaussian(0.5, 0.2, 1)"), ErrorKind::config_error);
    EXPECT_EQ(err("gaussian(0.5, 0.5, 0, 1)"), ErrorKind::config_error);
    EXPECT_EQ(err("spline(1)"), ErrorKind::config_error);
    EXPECT_EQ(err("missing.txt"), ErrorKind::config_error);
    const std::array<int, 2> other{5, 5};
    write_field(dir / "other.txt", Field(build_grid(2, len, other)));
    EXPECT_EQ(err("other.txt"), ErrorKind::grid_mismatch);
}

TEST(Config, ControlSpecIsMasked) {
    RunConfig c = parse("[scenario]\ncontrol_box = 0.2 0.5\ncells = 10\nN = 3\nf_spec = 2\n");
    const chemrep::Setup s = make_setup(c);
    EXPECT_EQ(s.f.steps(), 3u);
    EXPECT_TRUE(s.f.off_mask_zero());
    EXPECT_EQ(s.f.max(), 2.0);
    EXPECT_EQ(s.u0.grid->control_count(), 3u);
}

TEST(Config, TargetSpecs) {
    TempDir dir;
    RunConfig c = parse("[scenario]\ncells = 8\nN = 4\nT = 0.04\n[cost]\ntarget_spec = constant(1, 2)\n",
                        dir.path());
    const chemrep::Setup s = make_setup(c);
    CostParams cost = make_cost(c, s);
    EXPECT_EQ(cost.u_d.node_count(), 5u);
    EXPECT_EQ(cost.u_d[4].values, std::vector<double>(8, 1.0));
    EXPECT_EQ(cost.v_d[0].values, std::vector<double>(8, 2.0));

    c.cost.target_spec = "uncontrolled(0.25)";
    cost = make_cost(c, s);
    const StateTrajectory free =
        solve_state(s.u0, s.v0, Control::zero(s.u0.grid, s.time), s.params, s.time);
    EXPECT_DOUBLE_EQ(cost.u_d[3][2], free.u[3][2] + 0.25);

    fs::create_directories(dir / "targets");
    for (int n = 0; n <= 4; ++n) {
        char name[32];
        std::snprintf(name, sizeof name, "_%05d.txt", n);
        write_field(dir / "targets" / ("u" + std::string(name)), Field(s.u0.grid, n));
        write_field(dir / "targets" / ("v" + std::string(name)), Field(s.u0.grid, -n));
    }
    c.cost.target_spec = "targets";
    cost = make_cost(c, s);
    EXPECT_EQ(cost.u_d[3][0], 3.0);
    EXPECT_EQ(cost.v_d[2][0], -2.0);

    fs::remove(dir / "targets" / "v_00004.txt");
    EXPECT_EQ(kind_of([&] { make_cost(c, s); }), ErrorKind::config_error);
    c.cost.target_spec = "constant(1)";
    EXPECT_EQ(kind_of([&] { make_cost(c, s); }), ErrorKind::config_error);
}

TEST(Simulate, ZeroDataGivesZeroOutputs) {
    TempDir dir;
    write_text(dir / "c.ini", "[scenario]\nu0_spec = 0\nv0_spec = 0\nN = 20\n[run]\nsnapshot_stride = 5\n");
    const Outcome o = invoke(Command::simulate, dir / "c.ini", dir / "out");
    ASSERT_EQ(o.code, 0) << o.err;
    int snapshots = 0;
    for (const auto& e : fs::directory_iterator(dir / "out")) {
        const std::string name = e.path().filename().string();
        if (name[1] != '_') continue;
        ++snapshots;
        for (double x : read_field(e.path()).values) EXPECT_EQ(x, 0.0);
    }
    EXPECT_EQ(snapshots, 10);  // u and v at nodes 0, 5, 10, 15, 20
    const auto rep = read_json(dir / "out" / "report.json");
    const auto& d = rep["diagnostics"];
    EXPECT_EQ(d["mass"]["final"], 0.0);
    EXPECT_EQ(d["energy"]["final"], 0.0);
    EXPECT_EQ(d["energy"]["residual_l1"], 0.0);
    EXPECT_EQ(d["min_u"], 0.0);
}

TEST(Simulate, RerunIsByteIdentical) {
    TempDir dir;
    write_text(dir / "c.ini", "[scenario]\nlogistic = true\nr = 1\nmu = 0.5\neps_sweep = 0.01\n");
    ASSERT_EQ(invoke(Command::simulate, dir / "c.ini", dir / "a").code, 0);
    ASSERT_EQ(invoke(Command::simulate, dir / "c.ini", dir / "b").code, 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        ++files;
        EXPECT_EQ(read_text(e.path()), read_text(dir / "b" / e.path().filename()))
            << e.path().filename();
    }
    EXPECT_GT(files, 5);
}

TEST(Simulate, EpsSweepTable) {
    TempDir dir;
    write_text(dir / "c.ini", "[scenario]\neps_sweep = 0.04 0.02 0.01 0.005\n");
    ASSERT_EQ(invoke(Command::simulate, dir / "c.ini", dir / "out").code, 0);
    std::istringstream csv(read_text(dir / "out" / "eps_sweep.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "eps,deviation");
    std::vector<double> dev;
    while (std::getline(csv, line)) dev.push_back(std::stod(line.substr(line.find(',') + 1)));
    ASSERT_EQ(dev.size(), 4u);
    for (std::size_t k = 1; k < dev.size(); ++k) EXPECT_LT(dev[k], dev[k - 1]);
    EXPECT_GT(dev.back(), 0.0);
}

TEST(Simulate, ErrorJson) {
    TempDir dir;
    // dt = 1 breaks the upwind step condition on this data.
    write_text(dir / "c.ini", "[scenario]\nT = 40\nN = 40\nv0_spec = gaussian(0.5, 0.05, 5)\n");
    const Outcome o = invoke(Command::simulate, dir / "c.ini", dir / "out");
    EXPECT_EQ(o.code, 2);
    const auto err = nlohmann::json::parse(o.err);
    EXPECT_EQ(err["error"]["kind"], "StabilityViolation");
    EXPECT_EQ(read_json(dir / "out" / "error.json"), err);
}

TEST(Optimize, UnboundedBoxWithoutControlCostRejected) {
    TempDir dir;
    write_text(dir / "c.ini", "[cost]\ngamma_f = 0\n");
    const Outcome o = invoke(Command::optimize, dir / "c.ini", dir / "out");
    EXPECT_EQ(o.code, 2);
    EXPECT_EQ(nlohmann::json::parse(o.err)["error"]["kind"], "InvalidArgument");
}

TEST(Optimize, TrackingTheUncontrolledRunStopsAtOnce) {
    TempDir dir;
    write_text(dir / "c.ini", "[cost]\ntarget_spec = uncontrolled\n");
    const Outcome o = invoke(Command::optimize, dir / "c.ini", dir / "out");
    ASSERT_EQ(o.code, 0) << o.err;
    const auto rep = read_json(dir / "out" / "report.json");
    EXPECT_EQ(rep["iterations"], 0);
    EXPECT_EQ(rep["stop_reason"], "stationary");
    EXPECT_EQ(rep["cost"]["total"], 0.0);
}

TEST(Optimize, StandardTrackingHistoryIsMonotone) {
    TempDir dir;
    write_text(dir / "c.ini",
               "[scenario]\ncontrol_box = 0.2 0.85\n[cost]\nf_min = -0.5\nf_max = 0.5\n"
               "tol_opt = 1e-9\ntol_J = 0\n[run]\nsnapshot_stride = 1000\n");
    const Outcome o = invoke(Command::optimize, dir / "c.ini", dir / "out", true);
    ASSERT_EQ(o.code, 0) << o.err << o.log;
    const auto rep = read_json(dir / "out" / "report.json");
    EXPECT_TRUE(rep["monotone"].get<bool>());
    EXPECT_TRUE(rep["vi_check"]["passed"].get<bool>());
    EXPECT_TRUE(rep["gradient_check"]["passed"].get<bool>());
    EXPECT_EQ(rep["gradient_check"]["rows"].size(), 10u);
    EXPECT_GT(rep["iterations"].get<int>(), 0);

    std::istringstream csv(read_text(dir / "out" / "history.csv"));
    std::string line;
    std::getline(csv, line);
    double prev = infinity;
    int rows = 0;
    while (std::getline(csv, line)) {
        const std::size_t a = line.find(',');
        const double j = std::stod(line.substr(a + 1, line.find(',', a + 1) - a - 1));
        EXPECT_LT(j, prev);
        prev = j;
        ++rows;
    }
    EXPECT_EQ(rows, rep["iterations"].get<int>() + 1);
    // Stride beyond N still writes the first and last nodes.
    EXPECT_TRUE(fs::exists(dir / "out" / "f_00000.txt"));
    EXPECT_TRUE(fs::exists(dir / "out" / "f_00039.txt"));
    EXPECT_TRUE(fs::exists(dir / "out" / "u_00040.txt"));
}

TEST(Seed, ConstantDataGivesClosedFormControl) {
    TempDir dir;
    write_text(dir / "c.ini", "[scenario]\nu0_spec = 1.3\nv0_spec = 1\np = 2.5\n[run]\nsnapshot_stride = 7\n");
    const Outcome o = invoke(Command::seed, dir / "c.ini", dir / "out");
    ASSERT_EQ(o.code, 0) << o.err;
    for (const char* name : {"f_00000.txt", "f_00007.txt", "f_00039.txt"}) {
        for (double x : read_field(dir / "out" / name).values)
            EXPECT_NEAR(x, 1.0 - std::pow(1.3, 2.5), 1e-12);
    }
    const auto rep = read_json(dir / "out" / "report.json");
    EXPECT_TRUE(rep["check"]["passed"].get<bool>());
    EXPECT_LE(rep["check"]["value"].get<double>(), 1e-10);
}

TEST(Seed, PartialControlRegionRejected) {
    TempDir dir;
    write_text(dir / "c.ini", "[scenario]\ncontrol_box = 0 0.5\n");
    EXPECT_EQ(invoke(Command::seed, dir / "c.ini", dir / "out").code, 2);
}

TEST(Verify, BrokenToleranceNamesTheFailingCheck) {
    TempDir dir;
    write_text(dir / "c.ini", "[verify]\nduality_tol = 1e-30\npositivity_scenarios = 5\n");
    const Outcome o = invoke(Command::verify, dir / "c.ini", dir / "out");
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.log.find("FAIL duality_p=2.0"), std::string::npos) << o.log;
    const auto rep = read_json(dir / "out" / "report.json");
    EXPECT_FALSE(rep["passed"].get<bool>());
    int failed = 0;
    for (const auto& c : rep["checks"]) {
        if (!c["passed"].get<bool>()) {
            ++failed;
            EXPECT_EQ(c["name"].get<std::string>().rfind("duality_", 0), 0u);
        }
    }
    EXPECT_EQ(failed, 3);
}

TEST(Verify, DefaultConfigPassesAndReproduces) {
    TempDir dir;
    write_text(dir / "c.ini", "[run]\nseed = 9\n");
    const Outcome a = invoke(Command::verify, dir / "c.ini", dir / "a");
    ASSERT_EQ(a.code, 0) << a.log;
    ASSERT_EQ(invoke(Command::verify, dir / "c.ini", dir / "b").code, 0);
    EXPECT_EQ(read_text(dir / "a" / "report.json"), read_text(dir / "b" / "report.json"));
}

TEST(Mms, SingleProblemTable) {
    TempDir dir;
    write_text(dir / "c.ini", "[mms]\ndims = 1\n");
    const Outcome o = invoke(Command::mms, dir / "c.ini", dir / "out", false, "a11");
    ASSERT_EQ(o.code, 0) << o.err << o.log;
    std::istringstream csv(read_text(dir / "out" / "convergence.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "problem,study,dim,level,h,dt,error,rate");
    std::vector<std::string> rows;
    while (std::getline(csv, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 6u);
    const std::string& last_space = rows[2];
    EXPECT_EQ(last_space.rfind("a11,space,1,2,", 0), 0u);
    EXPECT_GE(std::stod(last_space.substr(last_space.rfind(',') + 1)), 1.9);
}

TEST(Run, MissingCommandIsAnError) {
    TempDir dir;
    Invocation inv;
    inv.out = dir / "out";
    std::ostringstream log, err;
    EXPECT_EQ(run(inv, log, err), 2);
    EXPECT_EQ(nlohmann::json::parse(err.str())["error"]["kind"], "ConfigError");
}

TEST(Run, CommandFromConfig) {
    TempDir dir;
    write_text(dir / "c.ini", "[run]\ncommand = simulate\nout = sim\n[scenario]\nN = 40\nT = 0.1\n");
    Invocation inv;
    inv.config = dir / "c.ini";
    std::ostringstream log, err;
    const fs::path cwd = fs::current_path();
    fs::current_path(dir.path());
    const int code = run(inv, log, err);
    fs::current_path(cwd);
    EXPECT_EQ(code, 0) << err.str();
    EXPECT_TRUE(fs::exists(dir / "sim" / "report.json"));
}
