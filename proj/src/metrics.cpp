#include "segmamba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segmamba/errors.hpp"

namespace segmamba {

namespace {

void require_same_grid(const LabelMask& a, const LabelMask& b) {
    a.validate();
    b.validate();
    if (a.dims != b.dims) throw ShapeError("metric masks have different dims");
}

struct Overlap {
    std::size_t pred = 0, ref = 0, both = 0;
};

Overlap count(const LabelMask& pred, const LabelMask& ref, std::uint8_t label) {
    require_same_grid(pred, ref);
    Overlap o;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const bool p = pred.labels[i] == label, r = ref.labels[i] == label;
        o.pred += p;
        o.ref += r;
        o.both += p && r;
    }
    return o;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas s²(q−p)² + f(p) over one line (in place).
void edt_line(double* f, std::size_t n, std::size_t stride, double spacing, std::vector<double>& line,
              std::vector<std::size_t>& v, std::vector<double>& z, std::vector<double>& out) {
    const double s2 = spacing * spacing;
    for (std::size_t i = 0; i < n; ++i) line[i] = f[i * stride];
    std::size_t k = 0;
    bool any = false;
    for (std::size_t q = 0; q < n; ++q) {
        if (line[q] == kInf) continue;
        if (!any) {
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            any = true;
            continue;
        }
        const double fq = line[q] + s2 * static_cast<double>(q) * static_cast<double>(q);
        double sep;
        while (true) {
            const std::size_t p = v[k];
            const double fp = line[p] + s2 * static_cast<double>(p) * static_cast<double>(p);
            sep = (fq - fp) / (2.0 * s2 * static_cast<double>(q - p));
            if (sep <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        if (sep <= z[k]) {
            // k == 0 and the new parabola dominates everywhere
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        ++k;
        v[k] = q;
        z[k] = sep;
        z[k + 1] = kInf;
    }
    if (!any) return;
    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        const double d = static_cast<double>(q) - static_cast<double>(v[k]);
        out[q] = s2 * d * d + line[v[k]];
    }
    for (std::size_t i = 0; i < n; ++i) f[i * stride] = out[i];
}

} // namespace

double dice(const LabelMask& pred, const LabelMask& ref, std::uint8_t label) {
    const Overlap o = count(pred, ref, label);
    if (o.pred + o.ref == 0) return 1.0;
    return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.pred + o.ref);
}

double iou(const LabelMask& pred, const LabelMask& ref, std::uint8_t label) {
    const Overlap o = count(pred, ref, label);
    const std::size_t uni = o.pred + o.ref - o.both;
    if (uni == 0) return 1.0;
    return static_cast<double>(o.both) / static_cast<double>(uni);
}

std::vector<bool> surface_voxels(const LabelMask& mask, std::uint8_t label) {
    mask.validate();
    const auto [D, H, W] = mask.dims;
    std::vector<bool> surface(mask.voxels(), false);
    auto at = [&](std::size_t z, std::size_t y, std::size_t x) { return mask.labels[(z * H + y) * W + x] == label; };
    for (std::size_t z = 0; z < D; ++z) {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                if (!at(z, y, x)) continue;
                const bool edge = z == 0 || y == 0 || x == 0 || z + 1 == D || y + 1 == H || x + 1 == W;
                surface[(z * H + y) * W + x] = edge || !at(z - 1, y, x) || !at(z + 1, y, x) || !at(z, y - 1, x) ||
                                               !at(z, y + 1, x) || !at(z, y, x - 1) || !at(z, y, x + 1);
            }
        }
    }
    return surface;
}

std::vector<double> squared_distance_transform(const std::vector<bool>& features, const Dims3& dims,
                                               const Spacing3& spacing) {
    const auto [D, H, W] = dims;
    std::vector<double> f(features.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = features[i] ? 0.0 : kInf;
    const std::size_t longest = std::max({D, H, W});
    std::vector<double> line(longest), z(longest + 1), out(longest);
    std::vector<std::size_t> v(longest);
    // x, then y, then z
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < H; ++b) edt_line(f.data() + (a * H + b) * W, W, 1, spacing[2], line, v, z, out);
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t c = 0; c < W; ++c) edt_line(f.data() + a * H * W + c, H, W, spacing[1], line, v, z, out);
    for (std::size_t b = 0; b < H; ++b)
        for (std::size_t c = 0; c < W; ++c) edt_line(f.data() + b * W + c, D, H * W, spacing[0], line, v, z, out);
    return f;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw UndefinedMetric("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double hd95(const LabelMask& pred, const LabelMask& ref, std::uint8_t label, const Spacing3& spacing) {
    const Overlap o = count(pred, ref, label);
    if (o.pred == 0 || o.ref == 0) {
        throw UndefinedMetric("hd95 undefined for empty mask (label " + std::to_string(label) + ")");
    }
    const auto sp = surface_voxels(pred, label);
    const auto sr = surface_voxels(ref, label);
    const auto to_ref = squared_distance_transform(sr, pred.dims, spacing);
    const auto to_pred = squared_distance_transform(sp, pred.dims, spacing);
    std::vector<double> pooled;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        if (sp[i]) pooled.push_back(std::sqrt(to_ref[i]));
        if (sr[i]) pooled.push_back(std::sqrt(to_pred[i]));
    }
    return percentile(std::move(pooled), 0.95);
}

} // namespace segmamba
