#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tritier/calibration.hpp"
#include "tritier/config.hpp"
#include "tritier/corpus.hpp"
#include "tritier/gateway.hpp"
#include "tritier/judge.hpp"
#include "tritier/mock.hpp"
#include "tritier/reports.hpp"
#include "tritier/runner.hpp"
#include "tritier/tier1.hpp"

namespace tritier {

inline constexpr const char* kTriTierVersion = "0.1.0";

// Judge-comparison rows reconstructed from stored judgments (the report
// stage has no live judges; the compare-judges command scores live).
inline JudgeComparison judge_comparison_from_records(const std::vector<Tier2Record>& records,
                                                     const TendencyThresholds& thresholds = {}) {
    std::map<std::string, std::vector<const Tier2Record*>> by_judge;
    for (const auto& r : records) by_judge[r.judge_name].push_back(&r);
    JudgeComparison out;
    for (const auto& [judge, recs] : by_judge) {
        std::vector<double> s2s, latencies;
        for (const auto* r : recs) {
            s2s.push_back(r->s2);
            latencies.push_back(r->latency_s);
        }
        JudgeComparisonRow row;
        row.judge_name = judge;
        row.n = s2s.size();
        row.mean = stats::mean(s2s);
        row.stddev = s2s.size() >= 2 ? stats::sample_stddev(s2s) : 0.0;
        row.mean_latency_s = stats::mean(latencies);
        row.tendency = tendency_label(row.mean, row.stddev, thresholds);
        out.rows.push_back(std::move(row));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const auto& a, const auto& b) { return a.mean > b.mean; });
    // Pairwise ICC over common (model, pair) cells.
    std::vector<std::string> judges;
    for (const auto& [judge, _] : by_judge) judges.push_back(judge);
    for (std::size_t i = 0; i < judges.size(); ++i)
        for (std::size_t k = i + 1; k < judges.size(); ++k) {
            std::map<std::pair<std::string, std::string>, double> a_cells;
            for (const auto* r : by_judge[judges[i]]) a_cells[{r->model_name, r->pair_id}] = r->s2;
            std::vector<double> a, b;
            for (const auto* r : by_judge[judges[k]]) {
                auto it = a_cells.find({r->model_name, r->pair_id});
                if (it != a_cells.end()) {
                    a.push_back(it->second);
                    b.push_back(r->s2);
                }
            }
            JudgePairIcc cell{judges[i], judges[k], std::nullopt, a.size()};
            if (a.size() >= 3) {
                try {
                    cell.icc = cross_judge_icc(a, b);
                } catch (const Error&) {
                }
            }
            out.pairwise_icc.push_back(std::move(cell));
        }
    return out;
}

// ─── Pipeline ───────────────────────────────────────────────────────────────

class Pipeline {
public:
    using TransportFactory = std::function<std::shared_ptr<Transport>()>;

    // live_factory supplies the networking transport for live/record modes;
    // hermetic callers (tests, mock/replay runs) never provide one.
    explicit Pipeline(RunConfig cfg, TransportFactory live_factory = nullptr)
        : cfg_(std::move(cfg)), store_(cfg_.out_dir), live_factory_(std::move(live_factory)) {
        registry_ = load_registry(cfg_.registry_path);
        pairs_ = load_pairs(cfg_.pairs_path);
        for (const auto& p : pairs_) pair_index_[p.id] = &p;
        gateway_ = std::make_unique<Gateway>(build_transport(), RetryPolicy{}, nullptr, cfg_.seed);
    }

    const RunConfig& config() const { return cfg_; }
    const DimensionRegistry& registry() const { return registry_; }
    const std::vector<CritiquePair>& pairs() const { return pairs_; }
    Gateway& gateway() { return *gateway_; }
    RunStore& store() { return store_; }

    // Structural checks; never throws for findings, only for I/O on the
    // config itself.
    ValidationReport validate() const {
        ValidationReport rep;
        auto issue = [&](std::string where, std::string what) {
            rep.issues.push_back({std::move(where), std::move(what)});
        };
        try {
            load_registry(cfg_.registry_path);
        } catch (const Error& e) {
            issue(cfg_.registry_path.string(), e.what());
        }
        try {
            const auto pairs = load_pairs(cfg_.pairs_path);
            for (const auto& p : pairs) {
                const auto img = cfg_.image_root / p.image_ref;
                if (!std::filesystem::exists(img))
                    issue("pair " + p.id, "image not found: " + img.string());
            }
        } catch (const Error& e) {
            issue(cfg_.pairs_path.string(), e.what());
        }
        if (!cfg_.human_scores_path.empty()) {
            try {
                load_human_scores(cfg_.human_scores_path);
            } catch (const Error& e) {
                issue(cfg_.human_scores_path.string(), e.what());
            }
        }
        if (cfg_.model_names.empty()) issue("config", "no models configured under models.*");
        if (cfg_.primary_judge.empty())
            issue("config", "no judge configured under judges.*");
        else if (!cfg_.judges.count(cfg_.primary_judge))
            issue("config", "judges.primary names unknown judge '" + cfg_.primary_judge + "'");
        if (cfg_.transport == TransportMode::live) {
            auto check_creds = [&](const ModelEndpoint& e) {
                if (e.credentials_ref.empty() || !std::getenv(e.credentials_ref.c_str()))
                    issue("endpoint " + e.key(),
                          "credentials environment variable '" + e.credentials_ref + "' not set");
            };
            for (const auto& [_, e] : cfg_.models) check_creds(e);
            for (const auto& [_, e] : cfg_.judges) check_creds(e);
        }
        if (cfg_.transport == TransportMode::replay && !std::filesystem::exists(cfg_.recording_dir))
            issue("config", "replay transport but recording_dir does not exist: " +
                                cfg_.recording_dir.string());
        return rep;
    }

    void stage_generate() {
        std::vector<ModelEndpoint> models;
        for (const auto& name : cfg_.model_names) models.push_back(cfg_.models.at(name));
        GenerationOptions options;
        options.image_root = cfg_.image_root;
        options.max_output_tokens = cfg_.generation_max_tokens;
        run_generation(*gateway_, models, pairs_, store_, options);
        write_manifest("generate");
    }

    void stage_tier1() {
        for (const auto& name : cfg_.model_names) {
            const auto& model = cfg_.models.at(name).model_name;
            std::set<std::string> done;
            for (const auto& row : store_.read_rows(store_.tier1_path(model)))
                done.insert(row.at("pair_id").get<std::string>());
            for (const auto& row : store_.read_rows(store_.critiques_path(model))) {
                const GeneratedCritique g = generated_critique_from_json(row);
                if (!g.ok || done.count(g.pair_id)) continue;
                const CritiquePair* pair = find_pair(g.pair_id);
                const Tier1Report rep =
                    tier1_report_text(g.pair_id, g.text, pair->culture, registry_, cfg_.tier1);
                store_.append_row(store_.tier1_path(model), tier1_report_to_json(rep, model));
            }
        }
        write_manifest("tier1");
    }

    void stage_judge() {
        if (cfg_.primary_judge.empty() || !cfg_.judges.count(cfg_.primary_judge))
            fail(Errc::config, "judge stage: judges.primary is not configured");
        const ModelEndpoint judge = cfg_.judges.at(cfg_.primary_judge);
        JudgeOptions options;
        options.include_reference = cfg_.judge_sees_reference;
        options.max_output_tokens = cfg_.judge_max_tokens;
        for (const auto& name : cfg_.model_names) {
            const auto& model = cfg_.models.at(name).model_name;
            std::set<std::string> done;
            for (const auto& row : store_.read_rows(store_.judgments_path(model)))
                done.insert(row.at("pair_id").get<std::string>());
            for (const auto& row : store_.read_rows(store_.critiques_path(model))) {
                const GeneratedCritique g = generated_critique_from_json(row);
                if (!g.ok || done.count(g.pair_id)) continue;
                const CritiquePair* pair = find_pair(g.pair_id);
                json out;
                try {
                    const Tier2Record rec =
                        score_critique(*gateway_, judge, *pair, model, g.text, options);
                    out = tier2_record_to_json(rec);
                } catch (const Error& e) {
                    out["status"] = "error";
                    out["pair_id"] = g.pair_id;
                    out["model_name"] = model;
                    out["judge_name"] = judge.model_name;
                    out["error"] = e.what();
                }
                store_.append_row(store_.judgments_path(model), out);
            }
        }
        write_manifest("judge");
    }

    void stage_calibrate() {
        if (cfg_.human_scores_path.empty())
            fail(Errc::config, "calibrate stage: corpus.human_scores is not configured");
        if (cfg_.calibration_train == 0)
            fail(Errc::config, "calibrate stage: calibration.train is not configured");
        const auto humans = load_human_scores(cfg_.human_scores_path);
        std::size_t skipped = 0;
        const auto points = join_calibration_points(read_all_judgments(), humans, &skipped);
        auto [train, test] = split_train_test(points, cfg_.calibration_train, cfg_.seed);
        const CalibrationBundle bundle = fit_bundle(train);
        const CalibrationReport report = evaluate_mae(bundle, test);
        write_text(store_.root() / "bundle.json", bundle_to_json(bundle, cfg_.digest()).dump(2) + "\n");
        json cal = calibration_report_to_json(report);
        cal["joined_records"] = points.size();
        cal["skipped_records_without_human_scores"] = skipped;
        write_text(store_.root() / "calibration.json", cal.dump(2) + "\n");
        write_manifest("calibrate");
    }

    void stage_report(std::optional<std::filesystem::path> bundle_path = {},
                      std::optional<std::filesystem::path> reports_out = {}) {
        const auto reports_dir = reports_out.value_or(store_.root() / "reports");
        std::filesystem::create_directories(reports_dir);
        const CalibrationBundle bundle = load_bundle(bundle_path);
        const auto records = read_all_judgments();
        if (records.empty()) fail(Errc::insufficient_data, "report stage: no judgments found");

        // Tier I rows and per-cell aggregates.
        std::vector<std::pair<std::string, Tier1Report>> tier1_rows;
        std::map<std::pair<std::string, std::string>, double> tier1_aggregates;
        for (const auto& name : cfg_.model_names) {
            const auto& model = cfg_.models.at(name).model_name;
            for (const auto& row : store_.read_rows(store_.tier1_path(model))) {
                std::string model_name;
                Tier1Report rep = tier1_report_from_json(row, &model_name);
                if (model_name.empty()) model_name = model;
                tier1_aggregates[{model_name, rep.pair_id}] = rep.tier1_aggregate;
                tier1_rows.emplace_back(model_name, std::move(rep));
            }
        }

        const Leaderboard board = leaderboard(records, bundle, tier1_aggregates);
        write_report(reports_dir, "leaderboard", leaderboard_to_json(board),
                     leaderboard_to_text(board));

        const TierGapReport tg = tier_gap_report(tier1_rows, records);
        write_report(reports_dir, "tier_gap", tier_gap_to_json(tg), tier_gap_to_text(tg));

        std::vector<ScoredRecord> scored;
        for (const auto& r : records) {
            const CritiquePair* pair = find_pair(r.pair_id);
            scored.push_back(
                {r.pair_id, r.model_name, pair->culture, calibrated_score(bundle, r.scores)});
        }
        const CultureGapReport cg = culture_gap_report(scored);
        write_report(reports_dir, "culture_gap", culture_gap_to_json(cg), culture_gap_to_text(cg));

        const JudgeComparison jc = judge_comparison_from_records(records);
        write_report(reports_dir, "judge_comparison", judge_comparison_to_json(jc),
                     judge_comparison_to_text(jc));

        // Calibration report rendered from the calibrate stage's output.
        std::ifstream cal_in(store_.root() / "calibration.json", std::ios::binary);
        if (!cal_in) fail(Errc::stage, "report stage: calibrate has not produced calibration.json");
        json cal = json::parse(cal_in, nullptr, false);
        if (cal.is_discarded()) fail(Errc::io, "corrupt calibration.json");
        CalibrationReport cr;
        for (std::size_t d = 0; d < 5; ++d) {
            cr.mae_raw[d] = cal.at("dimensions").at(kDimensionNames[d]).at("mae_raw").get<double>();
            cr.mae_calibrated[d] =
                cal.at("dimensions").at(kDimensionNames[d]).at("mae_calibrated").get<double>();
        }
        cr.avg_raw = cal.at("avg_mae_raw").get<double>();
        cr.avg_calibrated = cal.at("avg_mae_calibrated").get<double>();
        cr.delta_pct = cal.at("delta_pct").get<double>();
        cr.aggregate_mae_raw = cal.at("aggregate_mae_raw").get<double>();
        cr.aggregate_mae_calibrated = cal.at("aggregate_mae_calibrated").get<double>();
        cr.n_test = cal.at("n_test").get<std::size_t>();
        write_report(reports_dir, "calibration", cal, calibration_report_to_text(cr));

        write_manifest("report");
    }

    // generate -> tier1 -> judge -> calibrate -> report, halting with the
    // stage name on failure.
    void run_all() {
        run_stage("generate", [&] { stage_generate(); });
        run_stage("tier1", [&] { stage_tier1(); });
        run_stage("judge", [&] { stage_judge(); });
        run_stage("calibrate", [&] { stage_calibrate(); });
        run_stage("report", [&] { stage_report(); });
    }

    template <typename Fn>
    void run_stage(const std::string& name, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            if (e.code() == Errc::stage) throw;
            throw Error(Errc::stage, "stage " + name + ": " + e.what());
        }
    }

    std::vector<Tier2Record> read_all_judgments() const {
        std::vector<Tier2Record> records;
        for (const auto& name : cfg_.model_names) {
            const auto& model = cfg_.models.at(name).model_name;
            for (const auto& row : store_.read_rows(store_.judgments_path(model)))
                if (row.value("status", "ok") == "ok")
                    records.push_back(tier2_record_from_json(row));
        }
        return records;
    }

    std::vector<CalibrationPoint> join_calibration_points(
        const std::vector<Tier2Record>& records, const std::vector<HumanScoreRecord>& humans,
        std::size_t* skipped_out = nullptr) const {
        // Rater means per pair per dimension.
        std::map<std::string, std::pair<DimensionScores, std::size_t>> means;
        for (const auto& h : humans) {
            auto& [sum, count] = means[h.pair_id];
            for (std::size_t d = 0; d < 5; ++d) sum.set_dim(d, sum.dim(d) + h.dim(d));
            ++count;
        }
        std::size_t skipped = 0;
        std::vector<CalibrationPoint> points;
        for (const auto& r : records) {
            auto it = means.find(r.pair_id);
            if (it == means.end()) {
                ++skipped;  // judged critique without human scores; flagged below
                continue;
            }
            const CritiquePair* pair = find_pair(r.pair_id);
            CalibrationPoint p;
            p.pair_id = r.pair_id;
            p.culture = pair->culture;
            p.judge = r.scores;
            for (std::size_t d = 0; d < 5; ++d)
                p.human.set_dim(d, it->second.first.dim(d) / static_cast<double>(it->second.second));
            points.push_back(std::move(p));
        }
        if (points.empty())
            fail(Errc::insufficient_data,
                 "no overlap between judged critiques and the human-scored file");
        if (skipped_out) *skipped_out = skipped;
        return points;
    }

private:
    std::shared_ptr<Transport> build_transport() {
        switch (cfg_.transport) {
            case TransportMode::mock:
                return std::make_shared<MockTransport>(make_deterministic_mock(cfg_.seed));
            case TransportMode::replay:
                return std::make_shared<ReplayTransport>(RecordingStore(cfg_.recording_dir));
            case TransportMode::record:
                return std::make_shared<RecordTransport>(require_live_transport(),
                                                         RecordingStore(cfg_.recording_dir));
            case TransportMode::live:
                return require_live_transport();
        }
        fail(Errc::config, "unreachable transport mode");
    }

    std::shared_ptr<Transport> require_live_transport() {
        if (!live_factory_)
            fail(Errc::config,
                 "transport mode '" + std::string(transport_mode_name(cfg_.transport)) +
                     "' needs a live transport, and none was provided");
        return live_factory_();
    }

    const CritiquePair* find_pair(const std::string& id) const {
        auto it = pair_index_.find(id);
        if (it == pair_index_.end())
            fail(Errc::validation, "record references unknown pair id '" + id + "'");
        return it->second;
    }

    CalibrationBundle load_bundle(std::optional<std::filesystem::path> path = {}) const {
        const auto bundle_path = path.value_or(store_.root() / "bundle.json");
        std::ifstream in(bundle_path, std::ios::binary);
        if (!in)
            fail(Errc::stage, "report stage: no calibration bundle at " + bundle_path.string());
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) fail(Errc::io, "corrupt bundle at " + bundle_path.string());
        return bundle_from_json(j);
    }

    void write_text(const std::filesystem::path& path, const std::string& content) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::io, "cannot write " + path.string());
        out << content;
    }

    void write_report(const std::filesystem::path& dir, const std::string& base, const json& j,
                      const std::string& text) const {
        write_text(dir / (base + ".json"), j.dump(2) + "\n");
        write_text(dir / (base + ".txt"), text);
    }

    void write_manifest(const std::string& completed_stage) {
        const auto path = store_.root() / "manifest.json";
        json manifest;
        if (std::filesystem::exists(path)) {
            std::ifstream in(path, std::ios::binary);
            manifest = json::parse(in, nullptr, false);
            if (manifest.is_discarded()) manifest = json::object();
        }
        manifest["config_digest"] = cfg_.digest();
        manifest["seed"] = cfg_.seed;
        manifest["transport"] = transport_mode_name(cfg_.transport);
        manifest["version"] = kTriTierVersion;
        manifest["stages"][completed_stage] = {{"complete", true}};
        write_text(path, manifest.dump(2) + "\n");
    }

    RunConfig cfg_;
    RunStore store_;
    TransportFactory live_factory_;
    DimensionRegistry registry_;
    std::vector<CritiquePair> pairs_;
    std::map<std::string, const CritiquePair*> pair_index_;
    std::unique_ptr<Gateway> gateway_;
};

}  // namespace tritier
