#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "maxgen/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"maxgen: black-box generation-length search and serving-impact simulator"};
    app.require_subcommand(1);

    maxgen::CliOptions options;
    std::int64_t seed_flag = -1;

    auto add_common = [&](CLI::App* cmd, bool with_jobs) {
        cmd->add_option("--config", options.config_path, "run configuration (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", options.out_dir, "output directory")->required();
        cmd->add_option("--seed", seed_flag, "override the config seed");
        if (with_jobs) {
            cmd->add_option("--jobs", options.jobs, "sweep parallelism")->check(CLI::PositiveNumber);
        }
    };

    auto* optimize = app.add_subcommand("optimize", "search for long-output prompts");
    add_common(optimize, false);
    optimize->add_flag("--enable-remote", options.enable_remote,
                       "allow querying the remote endpoint named in the config");

    auto* simulate = app.add_subcommand("simulate", "run a serving scenario");
    add_common(simulate, true);

    auto* defend = app.add_subcommand("defend-eval", "compare defenses on one workload");
    add_common(defend, true);

    maxgen::FixtureCliOptions fixture;
    auto* make_fixture =
        app.add_subcommand("make-fixture", "write the synthetic-victim vocabulary and quickstart config");
    make_fixture->add_option("--out", fixture.out_dir, "output directory")->required();
    make_fixture->add_option("--projection-seed", fixture.projection_seed, "projection matrix seed");
    make_fixture->add_option("--vocab-seed", fixture.vocab_seed, "vocabulary seed");
    make_fixture->add_option("--vocab-size", fixture.vocab_size, "vocabulary size");
    make_fixture->add_option("--prompt-len", fixture.prompt_len, "prompt length in tokens");
    make_fixture->add_option("--embed-dim", fixture.embed_dim, "embedding dimension");
    make_fixture->add_option("--latent-dim", fixture.latent_dim, "latent dimension");

    CLI11_PARSE(app, argc, argv);

    if (seed_flag >= 0) options.seed = static_cast<std::uint64_t>(seed_flag);

    if (optimize->parsed()) return maxgen::cmd_optimize(options);
    if (simulate->parsed()) return maxgen::cmd_simulate(options);
    if (defend->parsed()) return maxgen::cmd_defend_eval(options);
    if (make_fixture->parsed()) return maxgen::cmd_make_fixture(fixture);
    return maxgen::kExitConfig;
}
