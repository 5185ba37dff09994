#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemrep/checks.hpp"
#include "chemrep/cost_opt.hpp"
#include "chemrep/forward.hpp"
#include "chemrep/mms.hpp"

namespace chemrep::app {

enum class Command { simulate, optimize, verify, mms, seed };

Command parse_command(const std::string& name);
std::string to_string(Command c);

// Member defaults mirror the documented defaults of config_reference().

struct ScenarioConfig {
    ModelParams params;
    double T = 0.2;
    int N = 40;
    int dim = 1;
    std::vector<double> lengths{1.0};
    std::vector<int> cells{32};
    std::optional<Box> control_box;  ///< nullopt: control on the whole domain
    std::string u0_spec = "gaussian(0.35, 0.12, 1, 0.2)";
    std::string v0_spec = "gaussian(0.62, 0.18, 0.8, 0.1)";
    std::string f_spec = "constant(0)";
};

struct CostConfig {
    double gamma_u = 1.0;
    double gamma_v = 0.5;
    double gamma_f = 0.01;
    double delta = 0.0;
    double f_min = -infinity;
    double f_max = infinity;
    std::string f0_spec = "constant(0)";
    std::string target_spec = "uncontrolled(0.1)";
    int max_iters = 200;
    double tol_J = 1e-12;
    double tol_opt = 1e-6;
    double s_init = 200.0;
};

struct RunConfig {
    std::optional<Command> command;
    std::filesystem::path out = "out";
    std::uint64_t seed = 1;
    int snapshot_stride = 10;
    std::filesystem::path base_dir = ".";  ///< relative file specs resolve against this

    ScenarioConfig scenario;
    std::vector<double> eps_sweep;
    std::optional<double> kappa;

    CostConfig cost;

    VerifyOptions verify;
    double vi_tol = 1e-6;
    int vi_samples = 100;
    int gradient_directions = 10;
    double seed_residual_tol = 1e-10;

    std::vector<MmsProblem> mms_problems{MmsProblem::a1, MmsProblem::a11, MmsProblem::a19,
                                         MmsProblem::nonlinear};
    std::vector<int> mms_dims{1, 2};
    double space_rate_min = 1.9;
    double time_rate_min = 0.9;
};

/// Parses "key = value" text with [run], [scenario], [cost], [verify] and
/// [mms] blocks. Unknown blocks or keys, malformed values and missing files
/// throw config_error.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);
/// The configuration of an empty config file.
RunConfig default_config();

/// Every key with its default and meaning, in config syntax.
std::string config_reference();

GridPtr make_grid(const ScenarioConfig& sc);

/// constant(c) or a bare number, gaussian(c_1, .., c_dim, width, amp[, base]),
/// or a snapshot file path.
Field make_field(const std::string& spec, const GridPtr& grid,
                 const std::filesystem::path& base_dir);

/// Time-constant control from a field spec, masked to the control region.
Control make_control(const std::string& spec, const GridPtr& grid, TimeGrid time,
                     const std::filesystem::path& base_dir);

Setup make_setup(const RunConfig& cfg);

/// Targets from target_spec: uncontrolled, uncontrolled(shift), constant(u, v)
/// or a directory of u_NNNNN.txt / v_NNNNN.txt snapshots covering every node.
CostParams make_cost(const RunConfig& cfg, const Setup& s);

}  // namespace chemrep::app
