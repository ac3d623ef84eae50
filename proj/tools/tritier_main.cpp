// tritier: end-to-end CLI for the tri-tier art-critique evaluation framework.
//
// Exit codes: 0 success, 1 configuration/validation failure, 2 stage failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tritier/http_transport.hpp"
#include "tritier/tritier.hpp"

namespace fs = std::filesystem;
using namespace tritier;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<long> seed;
    std::optional<std::string> transport;
};

RunConfig load_config(const GlobalFlags& flags) {
    if (flags.config_path.empty()) fail(Errc::config, "--config is required");
    RunConfig cfg = load_run_config(flags.config_path);
    if (flags.seed) cfg.seed = static_cast<std::uint64_t>(*flags.seed);
    if (flags.transport) cfg.transport = transport_mode_from_name(*flags.transport);
    return cfg;
}

Pipeline make_pipeline(RunConfig cfg) {
    return Pipeline(std::move(cfg), [] { return make_http_transport(); });
}

void filter_models(RunConfig& cfg, const std::vector<std::string>& keep) {
    if (keep.empty()) return;
    std::vector<std::string> names;
    for (const auto& name : keep) {
        if (!cfg.models.count(name))
            fail(Errc::config, "--models names unknown model '" + name + "'");
        names.push_back(name);
    }
    cfg.model_names = std::move(names);
}

int run_validate(const GlobalFlags& flags) {
    RunConfig cfg = load_config(flags);
    Pipeline pipeline = make_pipeline(cfg);
    const ValidationReport report = pipeline.validate();
    if (report.clean()) {
        std::printf("validate: clean (%zu pairs, registry %zu dimensions)\n",
                    pipeline.pairs().size(), pipeline.registry().total());
        return 0;
    }
    for (const auto& issue : report.issues)
        std::printf("validate: FAIL %s: %s\n", issue.location.c_str(), issue.message.c_str());
    return 1;
}

int run_compare_judges(const GlobalFlags& flags, const std::vector<std::string>& judge_names,
                       const std::string& critiques_dir, long limit) {
    RunConfig cfg = load_config(flags);
    Pipeline pipeline = make_pipeline(cfg);
    std::vector<ModelEndpoint> judges;
    const auto& wanted = judge_names.empty() ? cfg.judge_names : judge_names;
    for (const auto& name : wanted) {
        if (!cfg.judges.count(name))
            fail(Errc::config, "compare-judges: unknown judge '" + name + "'");
        judges.push_back(cfg.judges.at(name));
    }
    if (judges.empty()) fail(Errc::config, "compare-judges: no judges configured");

    std::vector<std::pair<CritiquePair, std::string>> sample;
    if (!critiques_dir.empty()) {
        RunStore store{fs::path(critiques_dir)};
        for (const auto& pair : pipeline.pairs()) {
            for (const auto& entry : fs::directory_iterator(critiques_dir)) {
                if (!entry.is_directory()) continue;
                const auto path = entry.path() / "critiques.jsonl";
                if (!fs::exists(path)) continue;
                for (const auto& row : store.read_rows(path)) {
                    const GeneratedCritique g = generated_critique_from_json(row);
                    if (g.ok && g.pair_id == pair.id) sample.emplace_back(pair, g.text);
                }
            }
        }
    } else {
        for (const auto& pair : pipeline.pairs()) sample.emplace_back(pair, pair.bilingual_text());
    }
    if (limit > 0 && sample.size() > static_cast<std::size_t>(limit))
        sample.resize(static_cast<std::size_t>(limit));

    const JudgeComparison comparison = compare_judges(pipeline.gateway(), judges, sample);
    std::fputs(judge_comparison_to_text(comparison).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tri-tier cross-cultural art-critique evaluation"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "run configuration file")->envname("TRITIER_CONFIG");
    long seed_opt = -1;
    std::string transport_opt;
    app.add_option("--seed", seed_opt, "override the configured seed");
    app.add_option("--transport", transport_opt, "override transport: live|record|replay|mock");

    auto* cmd_validate = app.add_subcommand("validate", "check config, corpus and registry");

    auto* cmd_generate = app.add_subcommand("generate", "produce candidate critiques");
    std::vector<std::string> gen_models;
    std::string gen_pairs, gen_out;
    cmd_generate->add_option("--models", gen_models, "subset of configured models")->delimiter(',');
    cmd_generate->add_option("--pairs", gen_pairs, "pairs JSONL (overrides config)");
    cmd_generate->add_option("--out", gen_out, "run directory (overrides config)");

    auto* cmd_tier1 = app.add_subcommand("tier1", "compute automated metrics for generated critiques");
    std::string t1_out;
    cmd_tier1->add_option("--out", t1_out, "run directory (overrides config)");

    auto* cmd_judge = app.add_subcommand("judge", "score critiques with the configured judge");
    std::string judge_name, judge_critiques, judge_out;
    cmd_judge->add_option("--judge", judge_name, "judge endpoint name");
    cmd_judge->add_option("--critiques", judge_critiques, "run directory with critiques");
    cmd_judge->add_option("--out", judge_out, "run directory for judgments");

    auto* cmd_compare = app.add_subcommand("compare-judges", "score a sample with several judges");
    std::vector<std::string> cmp_judges;
    std::string cmp_critiques;
    long cmp_limit = 0;
    cmd_compare->add_option("--judges", cmp_judges, "judges to compare")->delimiter(',');
    cmd_compare->add_option("--critiques", cmp_critiques, "run directory with generated critiques");
    cmd_compare->add_option("--limit", cmp_limit, "cap the sample size");

    auto* cmd_calibrate = app.add_subcommand("calibrate", "fit isotonic calibration to human scores");
    std::string cal_scores, cal_human, cal_out;
    long cal_train = 0;
    cmd_calibrate->add_option("--scores", cal_scores, "run directory with judgments");
    cmd_calibrate->add_option("--human", cal_human, "human scores JSONL");
    cmd_calibrate->add_option("--train", cal_train, "training split size");
    cmd_calibrate->add_option("--out", cal_out, "also copy bundle.json here");

    auto* cmd_report = app.add_subcommand("report", "write leaderboard and gap reports");
    std::string rep_run, rep_bundle, rep_out;
    cmd_report->add_option("--run", rep_run, "run directory");
    cmd_report->add_option("--bundle", rep_bundle, "calibration bundle path");
    cmd_report->add_option("--out", rep_out, "reports output directory");

    auto* cmd_pipeline = app.add_subcommand("pipeline", "run generate, tier1, judge, calibrate, report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are validation failures
    }
    if (seed_opt >= 0) flags.seed = seed_opt;
    if (!transport_opt.empty()) flags.transport = transport_opt;

    try {
        if (cmd_validate->parsed()) return run_validate(flags);

        if (cmd_compare->parsed()) return run_compare_judges(flags, cmp_judges, cmp_critiques, cmp_limit);

        RunConfig cfg = load_config(flags);
        if (cmd_generate->parsed()) {
            filter_models(cfg, gen_models);
            if (!gen_pairs.empty()) cfg.pairs_path = fs::absolute(gen_pairs);
            if (!gen_out.empty()) cfg.out_dir = fs::absolute(gen_out);
            Pipeline pipeline = make_pipeline(std::move(cfg));
            pipeline.run_stage("generate", [&] { pipeline.stage_generate(); });
            std::printf("generate: done -> %s\n", pipeline.store().root().string().c_str());
            return 0;
        }
        if (cmd_tier1->parsed()) {
            if (!t1_out.empty()) cfg.out_dir = fs::absolute(t1_out);
            Pipeline pipeline = make_pipeline(std::move(cfg));
            pipeline.run_stage("tier1", [&] { pipeline.stage_tier1(); });
            std::printf("tier1: done\n");
            return 0;
        }
        if (cmd_judge->parsed()) {
            if (!judge_name.empty()) cfg.primary_judge = judge_name;
            if (!judge_critiques.empty()) cfg.out_dir = fs::absolute(judge_critiques);
            if (!judge_out.empty()) cfg.out_dir = fs::absolute(judge_out);
            Pipeline pipeline = make_pipeline(std::move(cfg));
            pipeline.run_stage("judge", [&] { pipeline.stage_judge(); });
            std::printf("judge: done\n");
            return 0;
        }
        if (cmd_calibrate->parsed()) {
            if (!cal_scores.empty()) cfg.out_dir = fs::absolute(cal_scores);
            if (!cal_human.empty()) cfg.human_scores_path = fs::absolute(cal_human);
            if (cal_train > 0) cfg.calibration_train = static_cast<std::size_t>(cal_train);
            Pipeline pipeline = make_pipeline(std::move(cfg));
            pipeline.run_stage("calibrate", [&] { pipeline.stage_calibrate(); });
            if (!cal_out.empty())
                fs::copy_file(pipeline.store().root() / "bundle.json", fs::absolute(cal_out),
                              fs::copy_options::overwrite_existing);
            std::printf("calibrate: done\n");
            return 0;
        }
        if (cmd_report->parsed()) {
            if (!rep_run.empty()) cfg.out_dir = fs::absolute(rep_run);
            Pipeline pipeline = make_pipeline(std::move(cfg));
            std::optional<fs::path> bundle, out;
            if (!rep_bundle.empty()) bundle = fs::absolute(rep_bundle);
            if (!rep_out.empty()) out = fs::absolute(rep_out);
            pipeline.run_stage("report", [&] { pipeline.stage_report(bundle, out); });
            std::printf("report: done\n");
            return 0;
        }
        if (cmd_pipeline->parsed()) {
            Pipeline pipeline = make_pipeline(cfg);
            const ValidationReport report = pipeline.validate();
            if (!report.clean()) {
                for (const auto& issue : report.issues)
                    std::fprintf(stderr, "pipeline: validation failed: %s: %s\n",
                                 issue.location.c_str(), issue.message.c_str());
                return 1;
            }
            pipeline.run_all();
            std::printf("pipeline: complete -> %s\n", pipeline.store().root().string().c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "tritier: %s\n", e.what());
        return e.code() == Errc::stage ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tritier: unexpected failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
