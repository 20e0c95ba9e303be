#include "segmamba/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "segmamba/arch.hpp"
#include "segmamba/bench.hpp"
#include "segmamba/check.hpp"
#include "segmamba/errors.hpp"
#include "segmamba/metrics.hpp"
#include "segmamba/parallel.hpp"
#include "segmamba/volio.hpp"

namespace segmamba::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config;
    std::string weights;
    std::uint64_t seed = 0;
    int threads = 1;
    bool verbose = false;
};

struct ConfigOverrides {
    std::size_t in_channels = 0;
    std::size_t num_classes = 0;
};

ModelConfig load_config(const std::string& path, const ConfigOverrides& over) {
    ModelConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config " + path);
        try {
            nlohmann::json::parse(in).get_to(cfg);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed config " + path + ": " + e.what());
        }
    }
    if (over.in_channels) cfg.in_channels = over.in_channels;
    if (over.num_classes) cfg.num_classes = over.num_classes;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_weights) {
    cmd->add_option("--config", f.config, "Model config JSON (ModelConfig field names)");
    if (with_weights) cmd->add_option("--weights", f.weights, "Weight manifest (.json); blob is the .bin sibling");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--threads", f.threads, "Worker threads inside kernels")->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", f.verbose, "Print per-stage feature shapes");
}

void add_overrides(CLI::App* cmd, ConfigOverrides& o) {
    cmd->add_option("--in-channels", o.in_channels, "Override config in_channels");
    cmd->add_option("--num-classes", o.num_classes, "Override config num_classes");
}

// ---------------------------------------------------------------------------

struct InferArgs {
    CommonFlags common;
    ConfigOverrides over;
    std::string input;
    std::string input_data;
    std::string output;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
    const ModelConfig cfg = load_config(a.common.config, a.over);
    if (a.common.weights.empty()) throw CLI::ValidationError("--weights", "is required");
    if (!fs::exists(a.common.weights)) throw IoError("weights file not found: " + a.common.weights);
    const ParamStore ps = load_weights(a.common.weights, cfg);

    const fs::path header = a.input;
    const fs::path data = a.input_data.empty() ? data_path_for(header) : fs::path(a.input_data);
    const Volume raw = read_volume(header, data);
    if (raw.channels != cfg.in_channels) {
        throw ShapeError("volume has " + std::to_string(raw.channels) + " channels, model expects " +
                         std::to_string(cfg.in_channels));
    }
    const PaddedVolume padded = pad_to_multiple(normalize_intensity(raw), cfg.spatial_multiple());

    ShapeTrace trace;
    const Tensor logits = model_forward(padded.volume.to_tensor(), ps, cfg, a.common.verbose ? &trace : nullptr);
    if (a.common.verbose) {
        for (const auto& [name, shape] : trace) out << name << ' ' << to_string(shape) << '\n';
    }

    LabelMask full;
    full.dims = padded.volume.dims;
    full.spacing = raw.spacing;
    full.labels = argmax_labels(logits);
    const LabelMask mask = crop(full, padded.original_dims);
    const fs::path out_header = a.output;
    write_mask(mask, out_header, data_path_for(out_header));
    out << "wrote " << out_header.string() << " (" << mask.dims[0] << "x" << mask.dims[1] << "x" << mask.dims[2]
        << ")\n";
    return kSuccess;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    CommonFlags common;
    std::vector<std::size_t> lengths{256, 512, 1024, 2048, 4096};
    std::size_t channels = 48;
    std::uint64_t budget = kDefaultAttentionBudget;
    int repeats = 3;
    std::string out_csv;
    bool no_attention = false;
    bool no_scan = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchOptions opts;
    opts.lengths = a.lengths;
    opts.channels = a.channels;
    opts.budget_bytes = a.budget;
    opts.repeats = a.repeats;
    opts.seed = a.common.seed;
    opts.run_attention = !a.no_attention;
    opts.run_scan = !a.no_scan;
    const auto rows = run_bench(opts);
    write_bench_csv(out, rows);
    if (!a.out_csv.empty()) {
        std::ofstream f(a.out_csv);
        if (!f) throw IoError("cannot write " + a.out_csv);
        write_bench_csv(f, rows);
    }
    for (const char* op : {"tom_scan", "attention"}) {
        const double slope = loglog_slope(rows, op);
        if (!std::isnan(slope)) out << "# " << op << " log-log slope " << std::setprecision(3) << slope << '\n';
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string pred_dir;
    std::string ref_dir;
    std::vector<int> labels{1};
    std::string out_csv;
    bool strict = false;
};

std::string format_value(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    for (int l : a.labels) {
        if (l < 0 || l > 255) throw CLI::ValidationError("--labels", "labels must be in [0, 255]");
    }
    auto stems = [](const std::string& dir) {
        if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
        std::set<std::string> s;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".json") s.insert(e.path().stem().string());
        }
        return s;
    };
    const auto pred = stems(a.pred_dir), ref = stems(a.ref_dir);
    bool unpaired = false;
    for (const auto& s : pred) {
        if (!ref.contains(s)) {
            err << "warning: prediction '" << s << "' has no reference; skipped\n";
            unpaired = true;
        }
    }
    for (const auto& s : ref) {
        if (!pred.contains(s)) {
            err << "warning: reference '" << s << "' has no prediction; skipped\n";
            unpaired = true;
        }
    }
    if (unpaired && a.strict) {
        err << "error: unpaired cases with --strict\n";
        return kIoOrUsage;
    }

    std::ostringstream csv;
    csv << "case_id,label,dice,iou,hd95\n";
    struct Acc {
        double dice = 0, iou = 0, hd = 0;
        int n = 0, n_hd = 0;
    };
    std::map<int, Acc> means;
    for (const auto& s : pred) {
        if (!ref.contains(s)) continue;
        const fs::path ph = fs::path(a.pred_dir) / (s + ".json"), rh = fs::path(a.ref_dir) / (s + ".json");
        const LabelMask p = read_mask(ph, data_path_for(ph));
        const LabelMask r = read_mask(rh, data_path_for(rh));
        for (int l : a.labels) {
            const auto label = static_cast<std::uint8_t>(l);
            const double d = dice(p, r, label), j = iou(p, r, label);
            std::string hd = "NA";
            Acc& acc = means[l];
            try {
                const double h = hd95(p, r, label, r.spacing);
                hd = format_value(h);
                acc.hd += h;
                ++acc.n_hd;
            } catch (const UndefinedMetric&) {
            }
            acc.dice += d;
            acc.iou += j;
            ++acc.n;
            csv << s << ',' << l << ',' << format_value(d) << ',' << format_value(j) << ',' << hd << '\n';
        }
    }
    for (const auto& [l, acc] : means) {
        csv << "mean," << l << ',' << format_value(acc.dice / acc.n) << ',' << format_value(acc.iou / acc.n) << ','
            << (acc.n_hd ? format_value(acc.hd / acc.n_hd) : "NA") << '\n';
    }
    out << csv.str();
    if (!a.out_csv.empty()) {
        std::ofstream f(a.out_csv);
        if (!f) throw IoError("cannot write " + a.out_csv);
        f << csv.str();
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

int cmd_init_weights(const CommonFlags& c, const ConfigOverrides& over, const std::string& out_path,
                     std::ostream& out) {
    const ModelConfig cfg = load_config(c.config, over);
    const ParamStore ps = init_weights(cfg, c.seed);
    save_weights(ps, out_path);
    out << "wrote " << ps.size() << " tensors (" << ps.scalar_count() << " weights) to " << out_path << " + "
        << blob_path_for(out_path).string() << '\n';
    return kSuccess;
}

int cmd_describe(const CommonFlags& c, const ConfigOverrides& over, const std::vector<std::size_t>& dims,
                 std::ostream& out) {
    const ModelConfig cfg = load_config(c.config, over);
    const nlohmann::json j = cfg;
    out << j.dump(2) << '\n';
    const auto schema = param_schema(cfg);
    std::size_t count = 0;
    for (const auto& p : schema) count += element_count(p.shape);
    out << "parameters: " << schema.size() << " tensors, " << count << " weights\n";
    if (!dims.empty()) {
        if (dims.size() != 3) throw CLI::ValidationError("--input-dims", "expects D,H,W");
        const ShapePlan plan = plan_shapes(cfg, {cfg.in_channels, dims[0], dims[1], dims[2]});
        for (std::size_t s = 0; s < plan.encoder.size(); ++s) {
            const auto& e = plan.encoder[s];
            out << "enc" << s << ' ' << to_string(e) << " (sequence length " << e[1] * e[2] * e[3] << ")\n";
        }
        out << "logits " << to_string(plan.output) << '\n';
    }
    return kSuccess;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Volumetric segmentation with tri-orientated selective-scan blocks"};
    app.require_subcommand(1);

    InferArgs infer;
    auto* c_infer = app.add_subcommand("infer", "Segment a volume");
    add_common(c_infer, infer.common, true);
    add_overrides(c_infer, infer.over);
    c_infer->add_option("--input", infer.input, "Volume header (.json)")->required();
    c_infer->add_option("--input-data", infer.input_data, "Raw volume data (default: header with .raw)");
    c_infer->add_option("--output", infer.output, "Mask header to write (.json; data goes to .raw)")->required();

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Sequence-length scaling benchmark");
    add_common(c_bench, bench.common, false);
    c_bench->add_option("--lengths", bench.lengths, "Sequence lengths")->delimiter(',');
    c_bench->add_option("--channels", bench.channels, "Token width");
    c_bench->add_option("--budget-bytes", bench.budget, "Attention memory budget");
    c_bench->add_option("--repeats", bench.repeats, "Timing repeats (fastest is kept)");
    c_bench->add_option("--out", bench.out_csv, "CSV output path");
    c_bench->add_flag("--no-attention", bench.no_attention, "Skip the attention comparator");
    c_bench->add_flag("--no-scan", bench.no_scan, "Skip the scan");

    std::string filter;
    CommonFlags check_common;
    auto* c_check = app.add_subcommand("check", "Run the invariant and oracle suite");
    add_common(c_check, check_common, false);
    c_check->add_option("--filter", filter, "Module name or check-name prefix");

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Score predicted masks against references");
    c_eval->add_option("--pred", eval.pred_dir, "Directory of predicted masks")->required();
    c_eval->add_option("--ref", eval.ref_dir, "Directory of reference masks")->required();
    c_eval->add_option("--labels", eval.labels, "Labels to score")->delimiter(',');
    c_eval->add_option("--out", eval.out_csv, "CSV output path");
    c_eval->add_flag("--strict", eval.strict, "Fail on unpaired files");

    CommonFlags init_common;
    ConfigOverrides init_over;
    std::string init_out;
    auto* c_init = app.add_subcommand("init-weights", "Write randomly initialized weights");
    add_common(c_init, init_common, false);
    add_overrides(c_init, init_over);
    c_init->add_option("--out", init_out, "Manifest path (.json); blob is the .bin sibling")->required();

    CommonFlags desc_common;
    ConfigOverrides desc_over;
    std::vector<std::size_t> desc_dims;
    auto* c_desc = app.add_subcommand("describe", "Print the config, parameter count and shape plan");
    add_common(c_desc, desc_common, false);
    add_overrides(c_desc, desc_over);
    c_desc->add_option("--input-dims", desc_dims, "Spatial extents D,H,W")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrUsage;
    }

    try {
        if (c_infer->parsed()) {
            set_num_threads(infer.common.threads);
            return cmd_infer(infer, out);
        }
        if (c_bench->parsed()) {
            set_num_threads(bench.common.threads);
            return cmd_bench(bench, out);
        }
        if (c_check->parsed()) {
            set_num_threads(check_common.threads);
            return run_checks(filter, out) == 0 ? kSuccess : kFailure;
        }
        if (c_eval->parsed()) return cmd_eval(eval, out, err);
        if (c_init->parsed()) return cmd_init_weights(init_common, init_over, init_out, out);
        if (c_desc->parsed()) return cmd_describe(desc_common, desc_over, desc_dims, out);
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrUsage;
    }
    return kIoOrUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"segmamba"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace segmamba::cli
