#include "segmamba/arch.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "segmamba/errors.hpp"
#include "segmamba/rng.hpp"

namespace segmamba {

using nlohmann::json;

std::string_view to_string(Direction dir) {
    switch (dir) {
    case Direction::forward:
        return "forward";
    case Direction::reverse:
        return "reverse";
    case Direction::inter_slice:
        return "inter-slice";
    }
    return "?";
}

Direction direction_from_string(std::string_view name) {
    for (Direction d : kAllDirections) {
        if (to_string(d) == name) return d;
    }
    if (name == "inter_slice") return Direction::inter_slice;
    throw ShapeError("unknown scan direction '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// ModelConfig

void ModelConfig::validate() const {
    if (in_channels == 0 || num_classes == 0) {
        throw ShapeError("in_channels and num_classes must be positive");
    }
    if (num_classes > 256) {
        throw ShapeError("num_classes must fit an 8-bit label (<= 256)");
    }
    if (stage_channels.empty() || stage_channels.size() != blocks_per_stage.size()) {
        throw ShapeError("stage_channels and blocks_per_stage must be non-empty and of equal length");
    }
    if (std::find(stage_channels.begin(), stage_channels.end(), 0) != stage_channels.end()) {
        throw ShapeError("stage channel widths must be positive");
    }
    if (d_state == 0 || expand == 0 || conv_kernel == 0 || scan_chunk == 0 || mlp_ratio == 0) {
        throw ShapeError("d_state, expand, conv_kernel, scan_chunk and mlp_ratio must be positive");
    }
    if (directions.empty()) {
        throw ShapeError("at least one scan direction must be enabled");
    }
    if (std::set<Direction>(directions.begin(), directions.end()).size() != directions.size()) {
        throw ShapeError("scan directions must be distinct");
    }
}

MambaConfig ModelConfig::mamba(std::size_t channels) const {
    MambaConfig m;
    m.d_model = channels;
    m.expand = expand;
    m.d_state = d_state;
    m.conv_kernel = conv_kernel;
    m.dt_rank = dt_rank;
    m.chunk = scan_chunk;
    return m;
}

bool ModelConfig::direction_enabled(Direction dir) const {
    return std::find(directions.begin(), directions.end(), dir) != directions.end();
}

void to_json(json& j, const ModelConfig& cfg) {
    std::vector<std::string> dirs;
    for (Direction d : cfg.directions) dirs.emplace_back(to_string(d));
    j = json{{"in_channels", cfg.in_channels},   {"num_classes", cfg.num_classes},
             {"stage_channels", cfg.stage_channels}, {"blocks_per_stage", cfg.blocks_per_stage},
             {"d_state", cfg.d_state},           {"expand", cfg.expand},
             {"conv_kernel", cfg.conv_kernel},   {"dt_rank", cfg.dt_rank},
             {"scan_chunk", cfg.scan_chunk},     {"directions", dirs},
             {"mlp_ratio", cfg.mlp_ratio}};
}

void from_json(const json& j, ModelConfig& cfg) {
    if (!j.is_object()) throw ShapeError("model config must be a JSON object");
    static const std::set<std::string> known{"in_channels", "num_classes", "stage_channels", "blocks_per_stage",
                                             "d_state",     "expand",      "conv_kernel",    "dt_rank",
                                             "scan_chunk",  "directions",  "mlp_ratio"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ShapeError("unknown model config key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("in_channels", cfg.in_channels);
    get("num_classes", cfg.num_classes);
    get("stage_channels", cfg.stage_channels);
    get("blocks_per_stage", cfg.blocks_per_stage);
    get("d_state", cfg.d_state);
    get("expand", cfg.expand);
    get("conv_kernel", cfg.conv_kernel);
    get("dt_rank", cfg.dt_rank);
    get("scan_chunk", cfg.scan_chunk);
    get("mlp_ratio", cfg.mlp_ratio);
    if (j.contains("directions")) {
        cfg.directions.clear();
        for (const auto& d : j.at("directions")) cfg.directions.push_back(direction_from_string(d.get<std::string>()));
    }
}

// ---------------------------------------------------------------------------
// Layer specs

ConvSpec stem_depthwise_spec(std::size_t in_channels) {
    return {in_channels, in_channels, Extent3::cube(7), Extent3::cube(2), Extent3::cube(3), in_channels};
}

ConvSpec stem_pointwise_spec(std::size_t in_channels, std::size_t out_channels) {
    return {in_channels, out_channels, Extent3::cube(1), Extent3::cube(1), Extent3::cube(0), 1};
}

ConvSpec downsample_spec(std::size_t in_channels, std::size_t out_channels) {
    return {in_channels, out_channels, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0), 1};
}

ConvSpec upsample_spec(std::size_t in_channels, std::size_t out_channels) {
    return {in_channels, out_channels, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0), 1};
}

ConvSpec block_conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
    return {in_channels, out_channels, Extent3::cube(kernel), Extent3::cube(1), Extent3::cube(kernel / 2), 1};
}

// ---------------------------------------------------------------------------
// Parameter schema

namespace {

Shape conv_weight_shape(const ConvSpec& s) {
    return {s.out_channels, s.in_channels / s.groups, s.kernel.d, s.kernel.h, s.kernel.w};
}

void add_conv(std::vector<ParamSpec>& out, const std::string& prefix, const ConvSpec& s) {
    out.push_back({prefix + ".weight", conv_weight_shape(s), InitKind::uniform_fan_in});
    out.push_back({prefix + ".bias", {s.out_channels}, InitKind::zeros});
}

void add_norm(std::vector<ParamSpec>& out, const std::string& prefix, std::size_t channels) {
    out.push_back({prefix + ".gamma", {channels}, InitKind::ones});
    out.push_back({prefix + ".beta", {channels}, InitKind::zeros});
}

void add_conv_block(std::vector<ParamSpec>& out, const std::string& prefix, std::size_t cin, std::size_t cout,
                    std::size_t kernel) {
    add_norm(out, prefix + ".norm", cin);
    add_conv(out, prefix + ".conv", block_conv_spec(cin, cout, kernel));
}

void add_linear(std::vector<ParamSpec>& out, const std::string& prefix, std::size_t cin, std::size_t cout) {
    out.push_back({prefix + ".weight", {cout, cin}, InitKind::uniform_fan_in});
    out.push_back({prefix + ".bias", {cout}, InitKind::zeros});
}

std::string block_prefix(std::size_t stage, std::size_t block) {
    return "enc" + std::to_string(stage) + ".block" + std::to_string(block);
}

std::string tom_branch_prefix(const std::string& prefix, Direction dir) {
    std::string name(to_string(dir));
    std::replace(name.begin(), name.end(), '-', '_');
    return prefix + "." + name;
}

} // namespace

std::vector<ParamSpec> param_schema(const ModelConfig& cfg) {
    cfg.validate();
    std::vector<ParamSpec> out;
    const auto& ch = cfg.stage_channels;

    add_conv(out, "stem.dw", stem_depthwise_spec(cfg.in_channels));
    add_conv(out, "stem.pw", stem_pointwise_spec(cfg.in_channels, ch[0]));

    for (std::size_t s = 0; s < cfg.stages(); ++s) {
        if (s > 0) {
            add_conv(out, "enc" + std::to_string(s) + ".down", downsample_spec(ch[s - 1], ch[s]));
        }
        for (std::size_t b = 0; b < cfg.blocks_per_stage[s]; ++b) {
            const std::string p = block_prefix(s, b);
            add_conv_block(out, p + ".gsc.proj3", ch[s], ch[s], 3);
            add_conv_block(out, p + ".gsc.proj1", ch[s], ch[s], 1);
            add_conv_block(out, p + ".gsc.fuse", ch[s], ch[s], 3);
            add_norm(out, p + ".ln1", ch[s]);
            for (Direction d : cfg.directions) {
                const std::string mp = tom_branch_prefix(p + ".tom", d);
                for (const auto& [name, shape] : mamba_param_shapes(cfg.mamba(ch[s]))) {
                    out.push_back({mp + "." + name, shape, InitKind::mamba});
                }
            }
            add_norm(out, p + ".ln2", ch[s]);
            add_linear(out, p + ".mlp.fc1", ch[s], ch[s] * cfg.mlp_ratio);
            add_linear(out, p + ".mlp.fc2", ch[s] * cfg.mlp_ratio, ch[s]);
        }
    }

    for (std::size_t s = cfg.stages(); s-- > 1;) {
        const std::string p = "dec" + std::to_string(s - 1);
        out.push_back({p + ".up.weight", {ch[s], ch[s - 1], 2, 2, 2}, InitKind::uniform_fan_in});
        out.push_back({p + ".up.bias", {ch[s - 1]}, InitKind::zeros});
        add_conv_block(out, p + ".conv1", 2 * ch[s - 1], ch[s - 1], 3);
        add_conv_block(out, p + ".conv2", ch[s - 1], ch[s - 1], 3);
    }
    out.push_back({"head.up.weight", {ch[0], ch[0], 2, 2, 2}, InitKind::uniform_fan_in});
    out.push_back({"head.up.bias", {ch[0]}, InitKind::zeros});
    add_conv(out, "head.cls", stem_pointwise_spec(ch[0], cfg.num_classes));
    return out;
}

ParamStore init_weights(const ModelConfig& cfg, std::uint64_t seed) {
    ParamStore store;
    const auto schema = param_schema(cfg);
    for (std::size_t i = 0; i < schema.size();) {
        const ParamSpec& spec = schema[i];
        if (spec.init == InitKind::mamba) {
            // A contiguous run of mamba parameters shares one branch prefix.
            const std::string prefix = spec.name.substr(0, spec.name.rfind(".in_proj.weight"));
            const std::size_t channels = spec.shape[1];
            const MambaConfig mcfg = cfg.mamba(channels);
            MambaBlockParams p = init_mamba_params(mcfg, derive_seed(seed, prefix));
            Tensor* fields[] = {&p.in_proj_w, &p.in_proj_b, &p.conv_w, &p.conv_b,     &p.x_proj_w,  &p.dt_proj_w,
                                &p.dt_proj_b, &p.A_log,     &p.d_skip, &p.out_proj_w, &p.out_proj_b};
            const auto shapes = mamba_param_shapes(mcfg);
            for (std::size_t k = 0; k < shapes.size(); ++k, ++i) {
                store.add(schema[i].name, std::move(*fields[k]));
            }
            continue;
        }
        Tensor t(spec.shape);
        switch (spec.init) {
        case InitKind::uniform_fan_in: {
            Rng rng(derive_seed(seed, spec.name));
            const double bound = 1.0 / std::sqrt(static_cast<double>(t.size() / spec.shape[0]));
            for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
            break;
        }
        case InitKind::ones:
            t = Tensor::ones(spec.shape);
            break;
        case InitKind::zeros:
        case InitKind::mamba:
            break;
        }
        store.add(spec.name, std::move(t));
        ++i;
    }
    return store;
}

void validate_params(const ParamStore& store, const ModelConfig& cfg) {
    const auto schema = param_schema(cfg);
    std::set<std::string> expected;
    for (const auto& spec : schema) {
        expected.insert(spec.name);
        if (!store.contains(spec.name)) {
            throw ParamError("missing parameter '" + spec.name + "' (expected shape " + to_string(spec.shape) + ")");
        }
        const Tensor& t = store.at(spec.name);
        if (t.shape() != spec.shape) {
            throw ParamError("parameter '" + spec.name + "' has shape " + to_string(t.shape()) + ", expected " +
                             to_string(spec.shape));
        }
    }
    for (const auto& [name, t] : store) {
        if (!expected.contains(name)) {
            throw ParamError("unexpected parameter '" + name + "' not implied by the model config");
        }
    }
}

ParamStore load_weights(const std::filesystem::path& manifest, const ModelConfig& cfg) {
    ParamStore store = load_weights(manifest);
    validate_params(store, cfg);
    return store;
}

MambaBlockParams mamba_params_from(const ParamStore& ps, const std::string& prefix, const MambaConfig& cfg) {
    MambaBlockParams p;
    Tensor* fields[] = {&p.in_proj_w, &p.in_proj_b, &p.conv_w, &p.conv_b,     &p.x_proj_w,  &p.dt_proj_w,
                        &p.dt_proj_b, &p.A_log,     &p.d_skip, &p.out_proj_w, &p.out_proj_b};
    const auto shapes = mamba_param_shapes(cfg);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        *fields[k] = ps.at(prefix + "." + shapes[k].name);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Forward pieces

namespace {

Tensor conv(const Tensor& x, const ParamStore& ps, const std::string& prefix, const ConvSpec& spec) {
    return conv3d(x, ps.at(prefix + ".weight"), ps.at(prefix + ".bias"), spec);
}

void record(ShapeTrace* trace, std::string name, const Tensor& t) {
    if (trace) trace->emplace_back(std::move(name), t.shape());
}

void require_volume(const Tensor& x, const char* what) {
    if (x.rank() != 4) {
        throw ShapeError(std::string(what) + " expects a [C,D,H,W] volume, got " + to_string(x.shape()));
    }
}

} // namespace

Tensor stem(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg) {
    require_volume(x, "stem");
    if (x.dim(1) % 2 || x.dim(2) % 2 || x.dim(3) % 2) {
        throw ShapeError("stem needs even spatial extents, got " + to_string(x.shape()));
    }
    const Tensor dw = conv(x, ps, "stem.dw", stem_depthwise_spec(cfg.in_channels));
    return conv(dw, ps, "stem.pw", stem_pointwise_spec(cfg.in_channels, cfg.stage_channels[0]));
}

Tensor conv_block(const Tensor& x, const ParamStore& ps, const std::string& prefix, std::size_t kernel) {
    const Tensor& w = ps.at(prefix + ".conv.weight");
    const Tensor normed = instance_norm(x, ps.at(prefix + ".norm.gamma"), ps.at(prefix + ".norm.beta"));
    Tensor y = conv3d(normed, w, ps.at(prefix + ".conv.bias"), block_conv_spec(x.dim(0), w.dim(0), kernel));
    unary_inplace(y, Unary::relu);
    return y;
}

Tensor gsc(const Tensor& z, const ParamStore& ps, const std::string& prefix) {
    require_volume(z, "gsc");
    const Tensor wide = conv_block(z, ps, prefix + ".proj3", 3);
    const Tensor gate = conv_block(z, ps, prefix + ".proj1", 1);
    const Tensor fused = conv_block(binary(wide, gate, Binary::mul), ps, prefix + ".fuse", 3);
    return binary(z, fused, Binary::add);
}

Tensor flatten_oriented(const Tensor& z, Direction dir) {
    require_volume(z, "flatten_oriented");
    const std::size_t C = z.dim(0), L = z.size() / std::max<std::size_t>(C, 1);
    switch (dir) {
    case Direction::forward:
        return permute(z, {1, 2, 3, 0}).reshape({L, C});
    case Direction::reverse: {
        const Tensor fwd = permute(z, {1, 2, 3, 0});
        Tensor out({L, C});
        for (std::size_t t = 0; t < L; ++t) {
            std::copy_n(fwd.ptr() + (L - 1 - t) * C, C, out.ptr() + t * C);
        }
        return out;
    }
    case Direction::inter_slice:
        return permute(z, {2, 3, 1, 0}).reshape({L, C});
    }
    throw ShapeError("unknown direction");
}

Tensor unflatten_oriented(const Tensor& tokens, Direction dir, const Extent3& e) {
    if (tokens.rank() != 2 || tokens.dim(0) != e.d * e.h * e.w) {
        throw ShapeError("unflatten_oriented: tokens " + to_string(tokens.shape()) + " do not match extent " +
                         std::to_string(e.d) + "x" + std::to_string(e.h) + "x" + std::to_string(e.w));
    }
    const std::size_t L = tokens.dim(0), C = tokens.dim(1);
    switch (dir) {
    case Direction::forward:
        return permute(tokens.reshape({e.d, e.h, e.w, C}), {3, 0, 1, 2});
    case Direction::reverse: {
        Tensor fwd({L, C});
        for (std::size_t t = 0; t < L; ++t) {
            std::copy_n(tokens.ptr() + (L - 1 - t) * C, C, fwd.ptr() + t * C);
        }
        return permute(std::move(fwd).reshape({e.d, e.h, e.w, C}), {3, 0, 1, 2});
    }
    case Direction::inter_slice:
        return permute(tokens.reshape({e.h, e.w, e.d, C}), {3, 2, 0, 1});
    }
    throw ShapeError("unknown direction");
}

Tensor tom(const Tensor& z, const ParamStore& ps, const std::string& prefix, const ModelConfig& cfg) {
    require_volume(z, "tom");
    const Extent3 e = spatial_extent(z);
    const MambaConfig mcfg = cfg.mamba(z.dim(0));
    Tensor sum;
    for (Direction dir : kAllDirections) {
        if (!cfg.direction_enabled(dir)) continue;
        const MambaBlockParams p = mamba_params_from(ps, tom_branch_prefix(prefix, dir), mcfg);
        Tensor branch = unflatten_oriented(mamba_block(flatten_oriented(z, dir), p, mcfg), dir, e);
        sum = sum.size() ? binary(sum, branch, Binary::add) : std::move(branch);
    }
    return sum.size() ? sum : Tensor::zeros(z.shape());
}

Tensor layer_norm_volume(const Tensor& z, const Tensor& gamma, const Tensor& beta) {
    return unflatten_oriented(layer_norm(flatten_oriented(z, Direction::forward), gamma, beta), Direction::forward,
                              spatial_extent(z));
}

Tensor tsmamba_block(const Tensor& z, const ParamStore& ps, const std::string& prefix, const ModelConfig& cfg) {
    const Tensor z_hat = gsc(z, ps, prefix + ".gsc");
    const Tensor normed = layer_norm_volume(z_hat, ps.at(prefix + ".ln1.gamma"), ps.at(prefix + ".ln1.beta"));
    const Tensor z_tilde = binary(tom(normed, ps, prefix + ".tom", cfg), z_hat, Binary::add);

    // The MLP mixes channels per voxel; run it in token space.
    const Tensor tokens = flatten_oriented(z_tilde, Direction::forward);
    Tensor h = linear(layer_norm(tokens, ps.at(prefix + ".ln2.gamma"), ps.at(prefix + ".ln2.beta")),
                      ps.at(prefix + ".mlp.fc1.weight"), ps.at(prefix + ".mlp.fc1.bias"));
    unary_inplace(h, Unary::gelu);
    h = linear(h, ps.at(prefix + ".mlp.fc2.weight"), ps.at(prefix + ".mlp.fc2.bias"));
    return unflatten_oriented(binary(h, tokens, Binary::add), Direction::forward, spatial_extent(z_tilde));
}

double fue_multiplier(double channel_mean) {
    const double p = 1.0 / (1.0 + std::exp(-channel_mean));
    const double u = p > 0.0 ? -p * std::log(p) : 0.0;
    return 2.0 - u;
}

Tensor fue(const Tensor& z) {
    require_volume(z, "fue");
    Tensor scale = reduce_mean(z, 0);
    for (float& v : scale.data()) v = static_cast<float>(fue_multiplier(v));
    Shape s = z.shape();
    s[0] = 1;
    return binary(z, std::move(scale).reshape(s), Binary::mul);
}

std::vector<Tensor> encoder_forward(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg,
                                    ShapeTrace* trace) {
    cfg.validate();
    require_volume(x, "encoder_forward");
    if (x.dim(0) != cfg.in_channels) {
        throw ShapeError("input has " + std::to_string(x.dim(0)) + " channels, config expects " +
                         std::to_string(cfg.in_channels));
    }
    const std::size_t m = cfg.spatial_multiple();
    if (x.dim(1) % m || x.dim(2) % m || x.dim(3) % m) {
        throw ShapeError("input extents " + to_string(x.shape()) + " must be divisible by " + std::to_string(m));
    }
    std::vector<Tensor> features;
    Tensor z = stem(x, ps, cfg);
    record(trace, "stem", z);
    for (std::size_t s = 0; s < cfg.stages(); ++s) {
        if (s > 0) {
            z = conv(z, ps, "enc" + std::to_string(s) + ".down",
                     downsample_spec(cfg.stage_channels[s - 1], cfg.stage_channels[s]));
        }
        for (std::size_t b = 0; b < cfg.blocks_per_stage[s]; ++b) {
            z = tsmamba_block(z, ps, block_prefix(s, b), cfg);
        }
        record(trace, "enc" + std::to_string(s), z);
        features.push_back(z);
    }
    return features;
}

Tensor decoder_forward(const std::vector<Tensor>& features, const ParamStore& ps, const ModelConfig& cfg,
                       ShapeTrace* trace) {
    if (features.size() != cfg.stages()) {
        throw ShapeError("decoder expects " + std::to_string(cfg.stages()) + " feature maps, got " +
                         std::to_string(features.size()));
    }
    const auto& ch = cfg.stage_channels;
    Tensor x = features.back();
    for (std::size_t s = cfg.stages(); s-- > 1;) {
        const std::string p = "dec" + std::to_string(s - 1);
        x = transposed_conv3d(x, ps.at(p + ".up.weight"), ps.at(p + ".up.bias"), upsample_spec(ch[s], ch[s - 1]));
        const Tensor& skip = features[s - 1];
        if (skip.shape() != x.shape()) {
            throw ShapeError("skip " + std::to_string(s - 1) + " has shape " + to_string(skip.shape()) +
                             ", upsampled path has " + to_string(x.shape()));
        }
        x = conv_block(concat_channels(x, fue(skip)), ps, p + ".conv1", 3);
        x = conv_block(x, ps, p + ".conv2", 3);
        record(trace, p, x);
    }
    x = transposed_conv3d(x, ps.at("head.up.weight"), ps.at("head.up.bias"), upsample_spec(ch[0], ch[0]));
    x = conv(x, ps, "head.cls", stem_pointwise_spec(ch[0], cfg.num_classes));
    record(trace, "logits", x);
    return x;
}

Tensor model_forward(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg, ShapeTrace* trace) {
    return decoder_forward(encoder_forward(x, ps, cfg, trace), ps, cfg, trace);
}

ShapePlan plan_shapes(const ModelConfig& cfg, const Shape& input) {
    cfg.validate();
    if (input.size() != 4 || input[0] != cfg.in_channels) {
        throw ShapeError("plan_shapes: input " + to_string(input) + " incompatible with config");
    }
    const std::size_t m = cfg.spatial_multiple();
    if (input[1] % m || input[2] % m || input[3] % m) {
        throw ShapeError("input extents " + to_string(input) + " must be divisible by " + std::to_string(m));
    }
    const auto& ch = cfg.stage_channels;
    ShapePlan plan;
    Shape s = conv3d_output_shape(input, stem_depthwise_spec(cfg.in_channels));
    s = conv3d_output_shape(s, stem_pointwise_spec(cfg.in_channels, ch[0]));
    plan.encoder.push_back(s);
    for (std::size_t i = 1; i < cfg.stages(); ++i) {
        s = conv3d_output_shape(s, downsample_spec(ch[i - 1], ch[i]));
        plan.encoder.push_back(s);
    }
    for (std::size_t i = cfg.stages(); i-- > 1;) {
        s = transposed_conv3d_output_shape(s, upsample_spec(ch[i], ch[i - 1]));
        Shape cat = s;
        cat[0] += plan.encoder[i - 1][0];
        s = conv3d_output_shape(cat, block_conv_spec(cat[0], ch[i - 1], 3));
        s = conv3d_output_shape(s, block_conv_spec(ch[i - 1], ch[i - 1], 3));
    }
    s = transposed_conv3d_output_shape(s, upsample_spec(ch[0], ch[0]));
    plan.output = conv3d_output_shape(s, stem_pointwise_spec(ch[0], cfg.num_classes));
    return plan;
}

std::vector<std::uint8_t> argmax_labels(const Tensor& logits) {
    require_volume(logits, "argmax_labels");
    const std::size_t K = logits.dim(0), n = logits.size() / K;
    if (K > 256) throw ShapeError("argmax_labels supports at most 256 classes");
    std::vector<std::uint8_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        float best = logits[i];
        for (std::size_t k = 1; k < K; ++k) {
            const float v = logits[k * n + i];
            if (v > best) {
                best = v;
                labels[i] = static_cast<std::uint8_t>(k);
            }
        }
    }
    return labels;
}

} // namespace segmamba
