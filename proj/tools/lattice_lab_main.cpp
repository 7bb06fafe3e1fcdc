#include "lattice_lab/errors.hpp"
#include "lattice_lab/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

unsigned threads_from_env() {
    const char* env = std::getenv("LATTICE_LAB_THREADS");
    if (!env || !*env) return 1;
    try {
        std::size_t used = 0;
        const long v = std::stol(env, &used);
        if (used != std::string(env).size() || v < 1) throw std::invalid_argument("range");
        return static_cast<unsigned>(v);
    } catch (const std::exception&) {
        throw lattice_lab::ValidationError("LATTICE_LAB_THREADS must be a positive integer, got \"" +
                                           std::string(env) + "\"");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical-lattice Fokker-Planck experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 0;
    for (const auto& name : lattice_lab::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output root (overrides output_dir)");
        sub->add_option("--threads", threads, "Worker threads for sweep (env LATTICE_LAB_THREADS)")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto command = lattice_lab::parse_command(app.get_subcommands().front()->get_name());
        const lattice_lab::RunConfig cfg = lattice_lab::load_config(config_path);
        lattice_lab::RunOptions opts;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        opts.threads = threads > 0 ? threads : threads_from_env();
        const auto result = lattice_lab::run(command, cfg, opts, std::cout, std::cerr);
        if (result.exit_code == 0) std::cerr << "run directory: " << result.run_dir.string() << '\n';
        return result.exit_code;
    } catch (const lattice_lab::ValidationError& e) {
        std::cerr << "lattice-lab: " << e.what() << '\n';
        return 1;
    } catch (const lattice_lab::NumericalError& e) {
        std::cerr << "lattice-lab: " << e.what() << '\n';
        return 2;
    }
}
