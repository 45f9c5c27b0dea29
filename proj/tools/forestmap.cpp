// forestmap command-line tool: calibrate basal-area models on plot networks,
// quantify their transferability, and map prediction + extrapolation risk
// over an AOI. `forestmap demo` runs the whole study on synthetic data.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "forestmap/csv.hpp"
#include "forestmap/envelope.hpp"
#include "forestmap/forest.hpp"
#include "forestmap/map_product.hpp"
#include "forestmap/metrics.hpp"
#include "forestmap/num_format.hpp"
#include "forestmap/rng.hpp"
#include "forestmap/select.hpp"
#include "forestmap/synth.hpp"
#include "forestmap/thinning.hpp"
#include "forestmap/transfer.hpp"
#include "forestmap/workflow.hpp"

namespace fs = std::filesystem;
using namespace forestmap;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct CommonOpts {
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

struct HpOpts {
    std::size_t ntrees = 500;
    std::size_t mtry = 0;
    std::size_t min_node = 5;

    ForestHyperparams to_hp(std::uint64_t seed) const {
        ForestHyperparams hp;
        hp.n_trees = ntrees;
        hp.mtry = mtry;
        hp.min_node_size = min_node;
        hp.seed = seed;
        return hp;
    }
};

void add_hp_flags(CLI::App* cmd, HpOpts& hp) {
    cmd->add_option("--ntrees", hp.ntrees, "Trees per forest")->capture_default_str();
    cmd->add_option("--mtry", hp.mtry, "Features tried per split (0 = p/3)")->capture_default_str();
    cmd->add_option("--min-node", hp.min_node, "Minimum node size")->capture_default_str();
}

std::string metrics_line(const FitMetrics& m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "r2=%.4f rmse=%.4f bias=%.4f n=%zu", m.r2, m.rmse, m.bias, m.n);
    return buf;
}

std::vector<std::string> retained_from(const std::string& selection_path,
                                       const std::string& predictor_list) {
    if (!selection_path.empty()) {
        return SelectionResult::from_json(load_json(selection_path)).retained;
    }
    std::vector<std::string> names;
    std::string token;
    std::stringstream ss(predictor_list);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) names.push_back(token);
    }
    if (names.empty()) {
        throw std::runtime_error("no predictors given: pass --selection or --predictors");
    }
    return names;
}

AoiExtent extent_of(const RasterGrid& g) {
    return AoiExtent{g.xllcorner, g.yllcorner, g.width(), g.height()};
}

// Deterministic sample of valid pixels as raw envelope-predictor vectors.
std::vector<std::vector<double>> sample_pixel_queries(const RasterStack& stack,
                                                      const std::vector<std::string>& predictors,
                                                      std::size_t count, std::uint64_t seed) {
    std::vector<const RasterGrid*> bands;
    for (const auto& name : predictors) bands.push_back(&stack.band(name));
    std::vector<std::size_t> valid;
    const std::size_t npix = stack.forest_type.values.size();
    for (std::size_t i = 0; i < npix; ++i) {
        bool ok = !stack.forest_type.is_nodata(stack.forest_type.values[i]);
        for (const auto* b : bands) ok = ok && !b->is_nodata(b->values[i]);
        if (ok) valid.push_back(i);
    }
    if (valid.empty()) throw std::runtime_error("no valid pixels in the stack");
    Rng rng(seed);
    rng.shuffle(valid);
    if (valid.size() > count) valid.resize(count);
    std::sort(valid.begin(), valid.end());
    std::vector<std::vector<double>> queries;
    queries.reserve(valid.size());
    for (std::size_t i : valid) {
        std::vector<double> q;
        q.reserve(bands.size());
        for (const auto* b : bands) q.push_back(b->values[i]);
        queries.push_back(std::move(q));
    }
    return queries;
}

void write_map_bundle(MapBundle& bundle, const fs::path& prefix, bool preview,
                      const nlohmann::json& args, std::vector<fs::path>& artifacts) {
    const fs::path ba_path = prefix.string() + "_ba.asc";
    const fs::path risk_path = prefix.string() + "_risk.asc";
    write_ascii_grid(bundle.ba_map, ba_path);
    write_ascii_grid(bundle.risk_map, risk_path);
    artifacts.push_back(ba_path);
    artifacts.push_back(risk_path);
    if (preview) {
        const fs::path pgm = prefix.string() + "_ba.pgm";
        const fs::path ppm = prefix.string() + "_risk.ppm";
        write_pgm_preview(bundle.ba_map, pgm);
        write_ppm_risk_preview(bundle.risk_map, ppm);
        artifacts.push_back(pgm);
        artifacts.push_back(ppm);
    }
    const fs::path manifest = prefix.string() + "_manifest.json";
    save_json(map_manifest(bundle, args), manifest);
    artifacts.push_back(manifest);
}

// ---------------------------------------------------------------------------
// demo: the full study on synthetic data.

int run_demo(const CommonOpts& common, const SynthConfig& base_cfg, const HpOpts& hp_opts,
             const SelectOptions& select_base, const ThinningPlan& plan_base, std::size_t n_queries,
             const fs::path& out) {
    std::vector<fs::path> artifacts;
    fs::create_directories(out / "data" / "stack");
    fs::create_directories(out / "models");
    fs::create_directories(out / "maps");

    SynthConfig cfg = base_cfg;
    cfg.seed = derive_seed(common.seed, {1});
    std::cout << "[demo] generating synthetic study area (" << cfg.n_subforests
              << " sub-forests + regional network)\n";
    const SynthDataset data = synth_generate(cfg);

    std::vector<const PlotTable*> datasets;
    for (const auto& t : data.local_tables) datasets.push_back(&t);
    datasets.push_back(&data.regional_table);
    for (const auto* t : datasets) {
        const fs::path p = out / "data" / ("plots_" + t->name() + ".csv");
        write_plots_csv(*t, p);
        artifacts.push_back(p);
    }
    write_raster_stack(data.stack, out / "data" / "stack");
    write_ascii_grid(data.truth, out / "data" / "truth_ba.asc");
    artifacts.push_back(out / "data" / "stack");
    artifacts.push_back(out / "data" / "truth_ba.asc");

    // Calibrate one model per dataset.
    std::vector<CalibratedModel> models;
    for (const auto* t : datasets) {
        CalibrationOptions opts;
        opts.split.seed = derive_seed(common.seed, {2, models.size()});
        opts.select = select_base;
        opts.select.seed = derive_seed(common.seed, {3, models.size()});
        opts.hp = hp_opts.to_hp(derive_seed(common.seed, {4, models.size()}));
        opts.threads = common.threads;
        std::cout << "[demo] calibrating model for " << t->name() << "...";
        std::cout.flush();
        models.push_back(calibrate_model(*t, opts));
        const CalibratedModel& m = models.back();
        std::cout << " retained " << m.selection.retained.size() << " predictors, validation "
                  << metrics_line(m.validation) << "\n";

        const fs::path model_path = out / "models" / (m.label + "_model.json");
        const fs::path env_path = out / "models" / (m.label + "_envelope.json");
        const fs::path sel_path = out / "models" / (m.label + "_selection.json");
        const fs::path test_path = out / "models" / (m.label + "_test.csv");
        save_json(m.forest.to_json(), model_path);
        save_json(m.envelope.to_json(), env_path);
        save_json(m.selection.to_json(), sel_path);
        write_plots_csv(m.split.test, test_path);
        artifacts.insert(artifacts.end(), {model_path, env_path, sel_path, test_path});
    }

    // Transfer matrix over the held-out test splits.
    std::cout << "[demo] evaluating the transfer matrix (" << models.size() << "x" << models.size()
              << ")\n";
    std::vector<LabeledModel> labeled;
    std::vector<const PlotTable*> tests;
    for (const auto& m : models) {
        labeled.push_back({m.label, &m.forest});
        tests.push_back(&m.split.test);
    }
    const TransferMatrix matrix = transfer_matrix(labeled, tests, common.threads);
    write_transfer_csv(matrix, out / "transfer_matrix.csv");
    artifacts.push_back(out / "transfer_matrix.csv");

    // Risk-class proportions per region and model (pixel sample per region).
    std::cout << "[demo] classifying pixel samples against every calibration envelope\n";
    const double aoi_w = cfg.aoi_width_km * 1000.0;
    const double aoi_h = cfg.aoi_height_km * 1000.0;
    const BlockLayout layout = BlockLayout::make(aoi_w, aoi_h, cfg.n_subforests);
    struct Region {
        std::string label;
        RasterStack stack;
    };
    std::vector<Region> regions;
    for (std::size_t s = 0; s < cfg.n_subforests; ++s) {
        const double x0 = static_cast<double>(s % layout.nbx) * layout.block_w;
        const double y0 = static_cast<double>(s / layout.nbx) * layout.block_h;
        regions.push_back({data.local_tables[s].name(),
                           crop_stack(data.stack, x0, y0, x0 + layout.block_w, y0 + layout.block_h)});
    }
    regions.push_back({"AOI", data.stack});
    {
        std::ofstream riskcsv(out / "risk_proportions.csv");
        riskcsv << "region,n_pixels_sampled";
        for (const auto& m : models) riskcsv << ',' << m.label << "_far_pct," << m.label << "_exterior_pct";
        riskcsv << '\n';
        std::vector<double> far_sums(models.size(), 0.0);
        std::vector<double> ext_sums(models.size(), 0.0);
        char buf[32];
        for (const auto& region : regions) {
            std::string row;
            std::size_t n_used = 0;
            for (std::size_t mi = 0; mi < models.size(); ++mi) {
                const auto queries = sample_pixel_queries(region.stack, models[mi].envelope.predictors(),
                                                          n_queries, derive_seed(common.seed, {5}));
                const ExtrapolationSummary s =
                    extrapolation_summary(models[mi].envelope, queries, common.threads);
                n_used = std::max(n_used, s.n);
                const double far_pct = 100.0 * s.proportion_far;
                const double ext_pct = 100.0 * (s.proportion_far + s.proportion_near);
                far_sums[mi] += far_pct;
                ext_sums[mi] += ext_pct;
                std::snprintf(buf, sizeof(buf), ",%.2f,%.2f", far_pct, ext_pct);
                row += buf;
            }
            riskcsv << region.label << ',' << n_used << row << '\n';
        }
        riskcsv << "mean,"; // n_pixels column left empty on the mean row
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            std::snprintf(buf, sizeof(buf), ",%.2f,%.2f", far_sums[mi] / static_cast<double>(regions.size()),
                          ext_sums[mi] / static_cast<double>(regions.size()));
            riskcsv << buf;
        }
        riskcsv << '\n';
    }
    artifacts.push_back(out / "risk_proportions.csv");

    // Sampling-effort curves on the regional network.
    std::cout << "[demo] running the sampling-effort experiment on the regional network\n";
    const CalibratedModel& regional = models.back();
    ThinningPlan plan = plan_base;
    plan.seed = derive_seed(common.seed, {6});
    ModelRecipe recipe;
    recipe.predictors = regional.selection.retained;
    recipe.hp = hp_opts.to_hp(derive_seed(common.seed, {7}));
    const auto effort_queries = sample_pixel_queries(data.stack, regional.selection.retained, n_queries,
                                                     derive_seed(common.seed, {8}));
    const auto points = effort_experiment(data.regional_table, extent_of(data.truth), plan, recipe,
                                          regional.split.test, effort_queries, common.threads);
    write_effort_csv(points, out / "effort_curves.csv");
    artifacts.push_back(out / "effort_curves.csv");

    // Map bundles for the first sub-forest: local model vs regional model.
    std::cout << "[demo] producing map bundles for " << data.local_tables[0].name() << "\n";
    const RasterStack& block_stack = regions[0].stack;
    const CalibratedModel* pair[2] = {&models[0], &regional};
    for (const CalibratedModel* which : pair) {
        MapBundle bundle = predict_raster(block_stack, which->forest, which->envelope, common.threads);
        bundle.model_label = which->label;
        bundle.envelope_label = which->label;
        const fs::path prefix = out / "maps" / (regions[0].label + "_" + which->label);
        write_map_bundle(bundle, prefix, true, {{"seed", common.seed}}, artifacts);
    }

    std::cout << "[demo] artifacts:\n";
    for (const auto& p : artifacts) std::cout << "  " << p.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forest attribute mapping: model calibration, transferability and extrapolation risk"};
    app.require_subcommand(1);
    app.fallthrough(); // global --seed/--threads may appear after the subcommand

    CommonOpts common;
    app.add_option("--seed", common.seed, "Root seed; every stage derives from it")
        ->capture_default_str();
    app.add_option("--threads", common.threads, "Worker threads (0 = hardware)")->capture_default_str();

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic study area")->fallthrough();
    SynthConfig synth_cfg;
    std::string synth_out = "synth_out";
    synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();
    synth_cmd->add_option("--plots", synth_cfg.plots_per_subforest, "Plots per sub-forest")
        ->capture_default_str();
    synth_cmd->add_option("--subforests", synth_cfg.n_subforests, "Number of sub-forests")
        ->capture_default_str();
    synth_cmd->add_option("--shift", synth_cfg.covariate_shift, "Covariate shift magnitude")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_cfg.noise_sd, "Response noise sd (m2/ha)")
        ->capture_default_str();
    synth_cmd->add_option("--aoi-km", synth_cfg.aoi_width_km, "AOI width/height (km)")
        ->capture_default_str();
    synth_cmd->add_option("--cellsize", synth_cfg.cellsize_m, "Raster cellsize (m)")
        ->capture_default_str();

    // --- select ---
    auto* select_cmd = app.add_subcommand("select", "Lasso + importance variable selection")->fallthrough();
    std::string select_plots, select_out = "selection.json";
    SelectOptions select_opts;
    select_cmd->add_option("--plots", select_plots, "Plot CSV")->required();
    select_cmd->add_option("--out", select_out, "Output JSON")->capture_default_str();
    select_cmd->add_option("--k", select_opts.cv_folds, "CV folds")->capture_default_str();
    select_cmd->add_option("--cap", select_opts.cap, "Max continuous predictors")->capture_default_str();
    select_cmd->add_flag("--lambda-min", select_opts.use_lambda_min,
                         "Select at lambda_min instead of lambda_1se");

    // --- fit ---
    auto* fit_cmd = app.add_subcommand("fit", "Split a dataset, fit model + envelope on calibration")->fallthrough();
    std::string fit_plots, fit_out = ".", fit_selection, fit_predictors;
    SplitSpec fit_split;
    HpOpts fit_hp;
    fit_cmd->add_option("--plots", fit_plots, "Plot CSV")->required();
    fit_cmd->add_option("--out", fit_out, "Output directory")->capture_default_str();
    fit_cmd->add_option("--selection", fit_selection, "Selection JSON from `select`");
    fit_cmd->add_option("--predictors", fit_predictors, "Comma-separated predictor names");
    fit_cmd->add_option("--train-frac", fit_split.train_fraction, "Training fraction")
        ->capture_default_str();
    fit_cmd->add_option("--calib-frac", fit_split.calib_fraction, "Calibration fraction of train")
        ->capture_default_str();
    fit_cmd->add_flag("--stratify", fit_split.stratify_by_type, "Stratify the split by forest type");
    add_hp_flags(fit_cmd, fit_hp);

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model JSON against a plot CSV")->fallthrough();
    std::string eval_model, eval_plots;
    eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
    eval_cmd->add_option("--plots", eval_plots, "Plot CSV (test set)")->required();

    // --- transfer ---
    auto* transfer_cmd = app.add_subcommand("transfer", "All-pairs transfer matrix CSV")->fallthrough();
    std::vector<std::string> transfer_models, transfer_tests;
    std::string transfer_out = "transfer_matrix.csv";
    transfer_cmd->add_option("--models", transfer_models, "Model JSONs")->required()->delimiter(',');
    transfer_cmd->add_option("--tests", transfer_tests, "Test CSVs")->required()->delimiter(',');
    transfer_cmd->add_option("--out", transfer_out, "Output CSV")->capture_default_str();

    // --- hull ---
    auto* hull_cmd = app.add_subcommand("hull", "Calibration envelope tools")->fallthrough();
    hull_cmd->require_subcommand(1);
    auto* hull_build = hull_cmd->add_subcommand("build", "Build an envelope from calibration plots")->fallthrough();
    std::string hb_plots, hb_selection, hb_predictors, hb_out = "envelope.json";
    hull_build->add_option("--plots", hb_plots, "Calibration plot CSV")->required();
    hull_build->add_option("--selection", hb_selection, "Selection JSON");
    hull_build->add_option("--predictors", hb_predictors, "Comma-separated predictor names");
    hull_build->add_option("--out", hb_out, "Output JSON")->capture_default_str();
    auto* hull_classify = hull_cmd->add_subcommand("classify", "Classify plots against an envelope")->fallthrough();
    std::string hc_env, hc_plots, hc_out;
    hull_classify->add_option("--envelope", hc_env, "Envelope JSON")->required();
    hull_classify->add_option("--plots", hc_plots, "Plot CSV to classify")->required();
    hull_classify->add_option("--out", hc_out, "Optional per-plot CSV output");

    // --- thin ---
    auto* thin_cmd = app.add_subcommand("thin", "Sampling-effort experiment on a plot network")->fallthrough();
    std::string thin_plots, thin_test, thin_selection, thin_stack, thin_out = "effort_curves.csv";
    ThinningPlan thin_plan;
    HpOpts thin_hp;
    std::size_t thin_queries = 2000;
    thin_cmd->add_option("--plots", thin_plots, "Network plot CSV")->required();
    thin_cmd->add_option("--test", thin_test, "Fixed test plot CSV")->required();
    thin_cmd->add_option("--selection", thin_selection, "Selection JSON (model recipe)")->required();
    thin_cmd->add_option("--stack", thin_stack, "Raster stack directory (AOI + pixel queries)")
        ->required();
    thin_cmd->add_option("--out", thin_out, "Output CSV")->capture_default_str();
    thin_cmd->add_option("--resolutions", thin_plan.resolutions_km, "Grid resolutions (km)")
        ->delimiter(',')
        ->capture_default_str();
    thin_cmd->add_option("--iterations", thin_plan.iterations, "Iterations per resolution")
        ->delimiter(',')
        ->capture_default_str();
    thin_cmd->add_option("--queries", thin_queries, "Pixel query sample size")->capture_default_str();
    add_hp_flags(thin_cmd, thin_hp);

    // --- map ---
    auto* map_cmd = app.add_subcommand("map", "Predict Ba and extrapolation risk over a stack")->fallthrough();
    std::string map_stack, map_model, map_env, map_out = "map";
    bool map_preview = false;
    map_cmd->add_option("--stack", map_stack, "Raster stack directory")->required();
    map_cmd->add_option("--model", map_model, "Model JSON")->required();
    map_cmd->add_option("--envelope", map_env, "Envelope JSON")->required();
    map_cmd->add_option("--out", map_out, "Output prefix")->capture_default_str();
    map_cmd->add_flag("--preview", map_preview, "Also write PGM/PPM previews");

    // --- demo ---
    auto* demo_cmd = app.add_subcommand("demo", "Full study on synthetic data")->fallthrough();
    std::string demo_out = "demo_out";
    SynthConfig demo_cfg;
    HpOpts demo_hp;
    SelectOptions demo_select;
    ThinningPlan demo_plan;
    std::size_t demo_queries = 2000;
    demo_cmd->add_option("--out", demo_out, "Output directory")->capture_default_str();
    demo_cmd->add_option("--plots", demo_cfg.plots_per_subforest, "Plots per sub-forest")
        ->capture_default_str();
    demo_cmd->add_option("--subforests", demo_cfg.n_subforests, "Number of sub-forests")
        ->capture_default_str();
    demo_cmd->add_option("--shift", demo_cfg.covariate_shift, "Covariate shift magnitude")
        ->capture_default_str();
    demo_cmd->add_option("--noise", demo_cfg.noise_sd, "Response noise sd")->capture_default_str();
    demo_cmd->add_option("--aoi-km", demo_cfg.aoi_width_km, "AOI width/height (km)")
        ->capture_default_str();
    demo_cmd->add_option("--cellsize", demo_cfg.cellsize_m, "Raster cellsize (m)")
        ->capture_default_str();
    demo_cmd->add_option("--cap", demo_select.cap, "Max continuous predictors")->capture_default_str();
    demo_cmd->add_option("--resolutions", demo_plan.resolutions_km, "Thinning resolutions (km)")
        ->delimiter(',')
        ->capture_default_str();
    demo_cmd->add_option("--iterations", demo_plan.iterations, "Iterations per resolution")
        ->delimiter(',')
        ->capture_default_str();
    demo_cmd->add_option("--queries", demo_queries, "Pixel query sample size")->capture_default_str();
    add_hp_flags(demo_cmd, demo_hp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth_cmd) {
            synth_cfg.seed = common.seed;
            const SynthDataset data = synth_generate(synth_cfg);
            fs::create_directories(fs::path(synth_out) / "stack");
            std::vector<fs::path> artifacts;
            for (const auto& t : data.local_tables) {
                const fs::path p = fs::path(synth_out) / ("plots_" + t.name() + ".csv");
                write_plots_csv(t, p);
                artifacts.push_back(p);
            }
            const fs::path rp = fs::path(synth_out) / "plots_regional.csv";
            write_plots_csv(data.regional_table, rp);
            artifacts.push_back(rp);
            write_raster_stack(data.stack, fs::path(synth_out) / "stack");
            write_ascii_grid(data.truth, fs::path(synth_out) / "truth_ba.asc");
            artifacts.push_back(fs::path(synth_out) / "stack");
            artifacts.push_back(fs::path(synth_out) / "truth_ba.asc");
            for (const auto& p : artifacts) std::cout << p.string() << "\n";
        } else if (*select_cmd) {
            select_opts.seed = common.seed;
            const PlotTable table = read_plots_csv(select_plots);
            const SelectionResult result = select_predictors(table, select_opts, common.threads);
            save_json(result.to_json(), select_out);
            std::cout << select_out << "\n";
            std::cout << "retained:";
            for (const auto& name : result.retained) std::cout << ' ' << name;
            std::cout << "\n";
        } else if (*fit_cmd) {
            const PlotTable table = read_plots_csv(fit_plots);
            fit_split.seed = common.seed;
            CalibrationOptions opts;
            opts.split = fit_split;
            opts.select.seed = common.seed;
            opts.hp = fit_hp.to_hp(derive_seed(common.seed, {4, 0}));
            opts.threads = common.threads;
            CalibratedModel model = [&] {
                if (fit_selection.empty() && fit_predictors.empty()) {
                    return calibrate_model(table, opts); // selection included
                }
                // Predictors given: skip selection, calibrate directly.
                const auto retained = retained_from(fit_selection, fit_predictors);
                DatasetSplit split = split_dataset(table, opts.split);
                Forest forest = fit_forest_on_table(split.calib, retained, opts.hp, opts.threads);
                CalibrationEnvelope envelope = CalibrationEnvelope::build(split.calib, retained);
                const std::vector<double> y = split.valid.responses();
                const std::vector<double> yhat = predict_table(forest, split.valid);
                SelectionResult sel;
                sel.retained = retained;
                return CalibratedModel{table.name(),       std::move(split), std::move(sel),
                                       std::move(forest),  std::move(envelope),
                                       compute_metrics(y, yhat)};
            }();
            fs::create_directories(fit_out);
            const fs::path model_path = fs::path(fit_out) / (model.label + "_model.json");
            const fs::path env_path = fs::path(fit_out) / (model.label + "_envelope.json");
            const fs::path test_path = fs::path(fit_out) / (model.label + "_test.csv");
            save_json(model.forest.to_json(), model_path);
            save_json(model.envelope.to_json(), env_path);
            write_plots_csv(model.split.test, test_path);
            std::cout << model_path.string() << "\n" << env_path.string() << "\n"
                      << test_path.string() << "\n";
            std::cout << "validation " << metrics_line(model.validation) << "\n";
        } else if (*eval_cmd) {
            const Forest forest = Forest::from_json(load_json(eval_model));
            const PlotTable table = read_plots_csv(eval_plots);
            const std::vector<double> y = table.responses();
            const std::vector<double> yhat = predict_table(forest, table);
            std::cout << metrics_line(compute_metrics(y, yhat)) << "\n";
        } else if (*transfer_cmd) {
            if (transfer_models.empty() || transfer_tests.empty()) {
                throw std::runtime_error("transfer needs --models and --tests");
            }
            std::vector<Forest> forests;
            forests.reserve(transfer_models.size());
            std::vector<LabeledModel> labeled;
            for (const auto& path : transfer_models) {
                forests.push_back(Forest::from_json(load_json(path)));
                labeled.push_back({fs::path(path).stem().string(), &forests.back()});
            }
            std::vector<PlotTable> tables;
            tables.reserve(transfer_tests.size());
            std::vector<const PlotTable*> tests;
            for (const auto& path : transfer_tests) tables.push_back(read_plots_csv(path));
            for (const auto& t : tables) tests.push_back(&t);
            const TransferMatrix matrix = transfer_matrix(labeled, tests, common.threads);
            write_transfer_csv(matrix, transfer_out);
            std::cout << transfer_out << "\n";
        } else if (*hull_build) {
            const PlotTable table = read_plots_csv(hb_plots);
            const auto predictors = retained_from(hb_selection, hb_predictors);
            const CalibrationEnvelope env = CalibrationEnvelope::build(table, predictors);
            save_json(env.to_json(), hb_out);
            std::cout << hb_out << "\n";
            std::cout << "points=" << env.point_count() << " mcd=" << format_double_sig(env.mcd(), 6)
                      << (env.hull_degenerate() ? " (degenerate hull)" : "") << "\n";
        } else if (*hull_classify) {
            const CalibrationEnvelope env = CalibrationEnvelope::from_json(load_json(hc_env));
            const PlotTable table = read_plots_csv(hc_plots);
            std::vector<std::size_t> indices;
            for (const auto& name : env.predictors()) indices.push_back(table.feature_index(name));
            std::vector<std::vector<double>> queries;
            queries.reserve(table.size());
            for (const Plot& p : table.plots()) {
                std::vector<double> q;
                q.reserve(indices.size());
                for (std::size_t idx : indices) q.push_back(p.features[idx]);
                queries.push_back(std::move(q));
            }
            const ExtrapolationSummary summary = extrapolation_summary(env, queries, common.threads);
            if (!hc_out.empty()) {
                std::ofstream out(hc_out);
                out << "id,class,distance\n";
                for (std::size_t i = 0; i < table.size(); ++i) {
                    const auto cls = env.classify(queries[i]);
                    out << table[i].id << ',' << to_string(cls.risk) << ',';
                    if (cls.distance) out << format_double_sig(*cls.distance, 9);
                    out << '\n';
                }
                std::cout << hc_out << "\n";
            }
            char buf[160];
            std::snprintf(buf, sizeof(buf), "inside=%.4f near=%.4f far=%.4f n=%zu",
                          summary.proportion_inside, summary.proportion_near, summary.proportion_far,
                          summary.n);
            std::cout << buf << "\n";
        } else if (*thin_cmd) {
            const PlotTable network = read_plots_csv(thin_plots);
            const PlotTable test = read_plots_csv(thin_test);
            const SelectionResult sel = SelectionResult::from_json(load_json(thin_selection));
            const RasterStack stack = read_raster_stack(thin_stack);
            thin_plan.seed = common.seed;
            ModelRecipe recipe;
            recipe.predictors = sel.retained;
            recipe.hp = thin_hp.to_hp(derive_seed(common.seed, {7}));
            const auto queries = sample_pixel_queries(stack, sel.retained, thin_queries,
                                                      derive_seed(common.seed, {8}));
            const auto points = effort_experiment(network, extent_of(stack.forest_type), thin_plan,
                                                  recipe, test, queries, common.threads);
            write_effort_csv(points, thin_out);
            std::cout << thin_out << "\n";
        } else if (*map_cmd) {
            const RasterStack stack = read_raster_stack(map_stack);
            const Forest forest = Forest::from_json(load_json(map_model));
            const CalibrationEnvelope env = CalibrationEnvelope::from_json(load_json(map_env));
            MapBundle bundle = predict_raster(stack, forest, env, common.threads);
            bundle.model_label = fs::path(map_model).stem().string();
            bundle.envelope_label = fs::path(map_env).stem().string();
            std::vector<fs::path> artifacts;
            nlohmann::json args;
            args["stack"] = map_stack;
            args["model"] = map_model;
            args["envelope"] = map_env;
            args["seed"] = common.seed;
            args["threads"] = common.threads;
            write_map_bundle(bundle, map_out, map_preview, args, artifacts);
            for (const auto& p : artifacts) std::cout << p.string() << "\n";
        } else if (*demo_cmd) {
            return run_demo(common, demo_cfg, demo_hp, demo_select, demo_plan, demo_queries, demo_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "forestmap: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
