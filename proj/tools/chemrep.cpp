#include <CLI11.hpp>

#include <iostream>

#include "chemrep/app/commands.hpp"

using namespace chemrep::app;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::string mms;
    bool check_gradient = false;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "config file (key = value with [block] headers)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", f.out, "output directory (overrides [run] out)");
    app.add_option("--seed", f.seed, "seed of every randomized check (overrides [run] seed)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chemo-repulsion forward solver, adjoint gradients and optimal control"};
    app.require_subcommand(0, 1);
    Flags flags;
    add_common(app, flags);
    bool reference = false;
    app.add_flag("--config-reference", reference, "print every config key with its default");

    struct Sub {
        Command cmd;
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {Command::simulate, "simulate", "run the state equations and write diagnostics"},
        {Command::optimize, "optimize", "minimize the tracking cost by projected gradient descent"},
        {Command::verify, "verify", "run the property battery and report pass/fail"},
        {Command::mms, "mms", "manufactured-solution convergence tables"},
        {Command::seed, "seed", "construct an admissible control from the initial data"},
    };
    std::vector<std::pair<Command, CLI::App*>> apps;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common(*sub, flags);
        if (s.cmd == Command::optimize)
            sub->add_flag("--check-gradient", flags.check_gradient,
                          "compare the gradient with finite differences at the initial control");
        if (s.cmd == Command::mms)
            sub->add_option("--mms", flags.mms, "single problem: a1, a11, a19 or nonlinear")
                ->check(CLI::IsMember({"a1", "a11", "a19", "nonlinear"}));
        apps.emplace_back(s.cmd, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_code::error;
    }

    if (reference) {
        std::cout << config_reference();
        return exit_code::ok;
    }

    Invocation inv;
    for (const auto& [cmd, sub] : apps)
        if (sub->parsed()) inv.command = cmd;
    if (!flags.config.empty()) inv.config = flags.config;
    if (!flags.out.empty()) inv.out = flags.out;
    if (app.count("--seed") > 0) inv.seed = flags.seed;
    for (const auto& [cmd, sub] : apps)
        if (sub->count("--seed") > 0) inv.seed = flags.seed;
    if (!flags.mms.empty()) inv.mms_problem = flags.mms;
    inv.check_gradient = flags.check_gradient;
    return run(inv, std::cout, std::cerr);
}
