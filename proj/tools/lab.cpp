#include "amlab/errors.hpp"
#include "amlab/lab/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

int emit_error(const std::string& code, const std::string& message) {
    nlohmann::json err{{"status", "error"}, {"code", code}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigidity and mixing lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
    run->add_option("--config", config_path, "experiment config")->required();
    auto* out_opt = run->add_option("--out-dir", out_dir, "output directory");
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("--config", config_path, "experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const nlohmann::json config = amlab::lab::load_config(config_path);
        if (*validate) {
            const auto diags = amlab::lab::validate_config(config);
            bool ok = true;
            for (const auto& d : diags) ok = ok && d.level != "error";
            nlohmann::json report{{"status", ok ? "ok" : "error"},
                                  {"diagnostics", amlab::lab::to_json(diags)}};
            std::cout << report.dump(2) << "\n";
            return ok ? 0 : 1;
        }
        amlab::lab::RunOptions opts;
        if (*out_opt) opts.out_dir = out_dir;
        if (*seed_opt) opts.seed = seed;
        const auto result = amlab::lab::run_experiment(config, opts);
        nlohmann::json summary{{"status", "ok"},
                               {"out_dir", result.out_dir},
                               {"files", result.files},
                               {"verdict", result.verdicts.value("verdict", "")}};
        std::cout << summary.dump(2) << "\n";
        return 0;
    } catch (const amlab::LabError& e) {
        return emit_error(std::string(amlab::to_string(e.code())), e.what());
    } catch (const std::exception& e) {
        return emit_error("internal", e.what());
    }
}
