#include "segmamba/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "segmamba/errors.hpp"
#include "segmamba/rng.hpp"

namespace segmamba::oracle {

Tensor conv3d_direct(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
    const long C = static_cast<long>(x.dim(0)), D = static_cast<long>(x.dim(1)), H = static_cast<long>(x.dim(2)),
               W = static_cast<long>(x.dim(3));
    const long KD = static_cast<long>(spec.kernel.d), KH = static_cast<long>(spec.kernel.h),
               KW = static_cast<long>(spec.kernel.w);
    const long OD = (D + 2 * static_cast<long>(spec.padding.d) - KD) / static_cast<long>(spec.stride.d) + 1;
    const long OH = (H + 2 * static_cast<long>(spec.padding.h) - KH) / static_cast<long>(spec.stride.h) + 1;
    const long OW = (W + 2 * static_cast<long>(spec.padding.w) - KW) / static_cast<long>(spec.stride.w) + 1;
    const long G = static_cast<long>(spec.groups);
    const long CO = static_cast<long>(spec.out_channels);
    const long cin_g = C / G, cout_g = CO / G;
    Tensor out({spec.out_channels, static_cast<std::size_t>(OD), static_cast<std::size_t>(OH),
                static_cast<std::size_t>(OW)});
    auto X = [&](long c, long d, long h, long w) -> double {
        if (d < 0 || h < 0 || w < 0 || d >= D || h >= H || w >= W) return 0.0;
        return x[static_cast<std::size_t>(((c * D + d) * H + h) * W + w)];
    };
    for (long oc = 0; oc < CO; ++oc) {
        const long g = oc / cout_g;
        for (long od = 0; od < OD; ++od)
            for (long oh = 0; oh < OH; ++oh)
                for (long ow = 0; ow < OW; ++ow) {
                    double acc = bias.size() ? bias[static_cast<std::size_t>(oc)] : 0.0;
                    for (long ic = 0; ic < cin_g; ++ic)
                        for (long kd = 0; kd < KD; ++kd)
                            for (long kh = 0; kh < KH; ++kh)
                                for (long kw = 0; kw < KW; ++kw) {
                                    const double wv =
                                        weight[static_cast<std::size_t>((((oc * cin_g + ic) * KD + kd) * KH + kh) * KW + kw)];
                                    acc += wv * X(g * cin_g + ic, od * static_cast<long>(spec.stride.d) + kd -
                                                                      static_cast<long>(spec.padding.d),
                                                  oh * static_cast<long>(spec.stride.h) + kh -
                                                      static_cast<long>(spec.padding.h),
                                                  ow * static_cast<long>(spec.stride.w) + kw -
                                                      static_cast<long>(spec.padding.w));
                                }
                    out[static_cast<std::size_t>(((oc * OD + od) * OH + oh) * OW + ow)] = static_cast<float>(acc);
                }
    }
    return out;
}

Tensor transposed_conv3d_scatter(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
    const long CI = static_cast<long>(x.dim(0)), D = static_cast<long>(x.dim(1)), H = static_cast<long>(x.dim(2)),
               W = static_cast<long>(x.dim(3));
    const long CO = static_cast<long>(spec.out_channels);
    const long KD = static_cast<long>(spec.kernel.d), KH = static_cast<long>(spec.kernel.h),
               KW = static_cast<long>(spec.kernel.w);
    const long SD = static_cast<long>(spec.stride.d), SH = static_cast<long>(spec.stride.h),
               SW = static_cast<long>(spec.stride.w);
    const long PD = static_cast<long>(spec.padding.d), PH = static_cast<long>(spec.padding.h),
               PW = static_cast<long>(spec.padding.w);
    const long OD = (D - 1) * SD + KD - 2 * PD, OH = (H - 1) * SH + KH - 2 * PH, OW = (W - 1) * SW + KW - 2 * PW;
    std::vector<double> acc(static_cast<std::size_t>(CO * OD * OH * OW), 0.0);
    for (long oc = 0; oc < CO; ++oc)
        for (long i = 0; i < OD * OH * OW; ++i)
            acc[static_cast<std::size_t>(oc * OD * OH * OW + i)] = bias.size() ? bias[static_cast<std::size_t>(oc)] : 0.0;
    for (long ic = 0; ic < CI; ++ic)
        for (long d = 0; d < D; ++d)
            for (long h = 0; h < H; ++h)
                for (long w = 0; w < W; ++w) {
                    const double v = x[static_cast<std::size_t>(((ic * D + d) * H + h) * W + w)];
                    for (long oc = 0; oc < CO; ++oc)
                        for (long kd = 0; kd < KD; ++kd)
                            for (long kh = 0; kh < KH; ++kh)
                                for (long kw = 0; kw < KW; ++kw) {
                                    const long od = d * SD + kd - PD, oh = h * SH + kh - PH, ow = w * SW + kw - PW;
                                    if (od < 0 || oh < 0 || ow < 0 || od >= OD || oh >= OH || ow >= OW) continue;
                                    const double wv = weight[static_cast<std::size_t>(
                                        (((ic * CO + oc) * KD + kd) * KH + kh) * KW + kw)];
                                    acc[static_cast<std::size_t>(((oc * OD + od) * OH + oh) * OW + ow)] += v * wv;
                                }
                }
    std::vector<float> data(acc.begin(), acc.end());
    return Tensor({static_cast<std::size_t>(CO), static_cast<std::size_t>(OD), static_cast<std::size_t>(OH),
                   static_cast<std::size_t>(OW)},
                  std::move(data));
}

double inner_product(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw ShapeError("inner_product size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double relative_error(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return INFINITY;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) != std::isnan(b[i])) return INFINITY;
        diff = std::max(diff, std::abs(static_cast<double>(a[i]) - b[i]));
        scale = std::max(scale, std::abs(static_cast<double>(b[i])));
    }
    return diff / std::max(scale, 1e-30);
}

Tensor random_tensor(const Shape& shape, std::uint64_t seed, float lo, float hi) {
    Rng rng(seed);
    Tensor t(shape);
    for (float& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

OverlapCounts overlap_by_sets(const LabelMask& pred, const LabelMask& ref, std::uint8_t label) {
    std::set<std::size_t> p, r;
    for (std::size_t i = 0; i < pred.labels.size(); ++i)
        if (pred.labels[i] == label) p.insert(i);
    for (std::size_t i = 0; i < ref.labels.size(); ++i)
        if (ref.labels[i] == label) r.insert(i);
    std::vector<std::size_t> inter, uni;
    std::set_intersection(p.begin(), p.end(), r.begin(), r.end(), std::back_inserter(inter));
    std::set_union(p.begin(), p.end(), r.begin(), r.end(), std::back_inserter(uni));
    return {p.size(), r.size(), inter.size(), uni.size()};
}

namespace {

struct Voxel {
    long z, y, x;
};

std::vector<Voxel> surface_list(const LabelMask& m, std::uint8_t label) {
    const long D = static_cast<long>(m.dims[0]), H = static_cast<long>(m.dims[1]), W = static_cast<long>(m.dims[2]);
    auto inside = [&](long z, long y, long x) {
        if (z < 0 || y < 0 || x < 0 || z >= D || y >= H || x >= W) return false;
        return m.labels[static_cast<std::size_t>((z * H + y) * W + x)] == label;
    };
    static constexpr long off[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    std::vector<Voxel> out;
    for (long z = 0; z < D; ++z)
        for (long y = 0; y < H; ++y)
            for (long x = 0; x < W; ++x) {
                if (!inside(z, y, x)) continue;
                bool surface = false;
                for (const auto& o : off) surface |= !inside(z + o[0], y + o[1], x + o[2]);
                if (surface) out.push_back({z, y, x});
            }
    return out;
}

std::vector<double> nearest(const std::vector<Voxel>& from, const std::vector<Voxel>& to, const Spacing3& s) {
    std::vector<double> out;
    out.reserve(from.size());
    for (const Voxel& a : from) {
        double best = INFINITY;
        for (const Voxel& b : to) {
            const double dz = static_cast<double>(a.z - b.z) * s[0];
            const double dy = static_cast<double>(a.y - b.y) * s[1];
            const double dx = static_cast<double>(a.x - b.x) * s[2];
            best = std::min(best, dz * dz + dy * dy + dx * dx);
        }
        out.push_back(std::sqrt(best));
    }
    return out;
}

} // namespace

double hd95_brute_force(const LabelMask& pred, const LabelMask& ref, std::uint8_t label, const Spacing3& spacing) {
    const auto sp = surface_list(pred, label);
    const auto sr = surface_list(ref, label);
    if (sp.empty() || sr.empty()) throw UndefinedMetric("hd95 undefined for empty mask");
    std::vector<double> all = nearest(sp, sr, spacing);
    const auto back = nearest(sr, sp, spacing);
    all.insert(all.end(), back.begin(), back.end());
    std::sort(all.begin(), all.end());
    const double rank = 0.95 * static_cast<double>(all.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= all.size()) return all.back();
    return all[lo] + (rank - static_cast<double>(lo)) * (all[lo + 1] - all[lo]);
}

LabelMask random_mask(const Dims3& dims, std::uint64_t seed, double density, std::uint8_t num_labels) {
    Rng rng(seed);
    LabelMask m;
    m.dims = dims;
    m.labels.resize(dims[0] * dims[1] * dims[2]);
    for (auto& l : m.labels) {
        l = rng.uniform() < density ? static_cast<std::uint8_t>(1 + rng.below(num_labels > 1 ? num_labels - 1 : 1))
                                    : 0;
    }
    return m;
}

} // namespace segmamba::oracle
