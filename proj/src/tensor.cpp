#include "segmamba/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "segmamba/errors.hpp"
#include "segmamba/parallel.hpp"

namespace segmamba {

std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "x" : "") << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("tensor shape " + to_string(shape_) + " needs " + std::to_string(element_count(shape_)) +
                         " elements, got " + std::to_string(data_.size()));
    }
}

Tensor Tensor::from(Shape shape, std::initializer_list<float> values) {
    return Tensor(std::move(shape), std::vector<float>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + to_string(shape_));
    }
    return shape_[axis];
}

Tensor Tensor::reshape(Shape shape) const& {
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::reshape(Shape shape) && {
    return Tensor(std::move(shape), std::move(data_));
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

std::size_t conv_out(std::size_t in, std::size_t k, std::size_t s, std::size_t p, const char* axis) {
    if (s == 0 || k == 0) {
        throw ShapeError(std::string("conv kernel and stride must be positive on axis ") + axis);
    }
    if (in + 2 * p < k) {
        throw ShapeError(std::string("conv kernel larger than padded input on axis ") + axis + " (in=" +
                         std::to_string(in) + ", pad=" + std::to_string(p) + ", k=" + std::to_string(k) + ")");
    }
    return (in + 2 * p - k) / s + 1;
}

void require_rank(const Tensor& x, std::size_t rank, const char* what) {
    if (x.rank() != rank) {
        throw ShapeError(std::string(what) + " expects rank " + std::to_string(rank) + ", got " +
                         to_string(x.shape()));
    }
}

} // namespace

void ConvSpec::validate() const {
    if (groups == 0 || in_channels == 0 || out_channels == 0) {
        throw ShapeError("conv channels and groups must be positive");
    }
    if (in_channels % groups != 0 || out_channels % groups != 0) {
        throw ShapeError("conv channels (" + std::to_string(in_channels) + " -> " + std::to_string(out_channels) +
                         ") not divisible by groups " + std::to_string(groups));
    }
}

Extent3 ConvSpec::output_extent(const Extent3& in) const {
    validate();
    return {conv_out(in.d, kernel.d, stride.d, padding.d, "d"), conv_out(in.h, kernel.h, stride.h, padding.h, "h"),
            conv_out(in.w, kernel.w, stride.w, padding.w, "w")};
}

Extent3 spatial_extent(const Tensor& x) {
    require_rank(x, 4, "volume");
    return {x.dim(1), x.dim(2), x.dim(3)};
}

Shape conv3d_output_shape(const Shape& input, const ConvSpec& spec) {
    if (input.size() != 4) {
        throw ShapeError("conv3d expects [C,D,H,W] input, got " + to_string(input));
    }
    if (input[0] != spec.in_channels) {
        throw ShapeError("conv3d input has " + std::to_string(input[0]) + " channels, spec expects " +
                         std::to_string(spec.in_channels));
    }
    const Extent3 o = spec.output_extent({input[1], input[2], input[3]});
    return {spec.out_channels, o.d, o.h, o.w};
}

Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
    const Shape out_shape = conv3d_output_shape(x.shape(), spec);
    const std::size_t cin_g = spec.in_channels / spec.groups;
    const std::size_t cout_g = spec.out_channels / spec.groups;
    const Shape w_expected{spec.out_channels, cin_g, spec.kernel.d, spec.kernel.h, spec.kernel.w};
    if (weight.shape() != w_expected) {
        throw ShapeError("conv3d weight shape " + to_string(weight.shape()) + ", expected " + to_string(w_expected));
    }
    if (bias.size() != 0 && bias.shape() != Shape{spec.out_channels}) {
        throw ShapeError("conv3d bias shape " + to_string(bias.shape()) + ", expected [" +
                         std::to_string(spec.out_channels) + "]");
    }

    const std::size_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::size_t OD = out_shape[1], OH = out_shape[2], OW = out_shape[3];
    const auto [KD, KH, KW] = spec.kernel;
    const auto [SD, SH, SW] = spec.stride;
    const auto [PD, PH, PW] = spec.padding;
    const std::size_t plane = OD * OH * OW;
    const std::size_t in_plane = D * H * W;
    const std::size_t ksize = KD * KH * KW;

    Tensor out(out_shape);
    const float* xin = x.ptr();
    const float* wt = weight.ptr();

    // Valid output range along one axis for kernel tap k: o*s + k - p in [0, n).
    auto valid_range = [](std::size_t n, std::size_t on, std::size_t s, std::size_t p, std::size_t k) {
        // smallest o with o*s + k >= p
        std::size_t lo = k >= p ? 0 : (p - k + s - 1) / s;
        // largest o with o*s + k - p <= n - 1
        std::size_t hi = 0;
        if (n + p > k) {
            hi = std::min(on, (n + p - k - 1) / s + 1);
        }
        return std::pair<std::size_t, std::size_t>{std::min(lo, hi), hi};
    };

    parallel_for(spec.out_channels, [&](std::size_t oc_begin, std::size_t oc_end) {
        std::vector<double> acc(plane);
        for (std::size_t oc = oc_begin; oc < oc_end; ++oc) {
            const std::size_t g = oc / cout_g;
            std::fill(acc.begin(), acc.end(), bias.size() ? static_cast<double>(bias[oc]) : 0.0);
            for (std::size_t icg = 0; icg < cin_g; ++icg) {
                const float* src = xin + (g * cin_g + icg) * in_plane;
                const float* wk = wt + (oc * cin_g + icg) * ksize;
                for (std::size_t kd = 0; kd < KD; ++kd) {
                    const auto [od0, od1] = valid_range(D, OD, SD, PD, kd);
                    for (std::size_t kh = 0; kh < KH; ++kh) {
                        const auto [oh0, oh1] = valid_range(H, OH, SH, PH, kh);
                        for (std::size_t kw = 0; kw < KW; ++kw) {
                            const auto [ow0, ow1] = valid_range(W, OW, SW, PW, kw);
                            if (ow0 >= ow1) continue;
                            const double wv = wk[(kd * KH + kh) * KW + kw];
                            for (std::size_t od = od0; od < od1; ++od) {
                                const std::size_t id = od * SD + kd - PD;
                                for (std::size_t oh = oh0; oh < oh1; ++oh) {
                                    const std::size_t ih = oh * SH + kh - PH;
                                    const float* row = src + (id * H + ih) * W;
                                    double* dst = acc.data() + (od * OH + oh) * OW;
                                    if (SW == 1) {
                                        const float* shifted = row + (ow0 + kw - PW);
                                        double* d = dst + ow0;
                                        const std::size_t n = ow1 - ow0;
                                        for (std::size_t i = 0; i < n; ++i) {
                                            d[i] += wv * static_cast<double>(shifted[i]);
                                        }
                                    } else {
                                        for (std::size_t ow = ow0; ow < ow1; ++ow) {
                                            dst[ow] += wv * static_cast<double>(row[ow * SW + kw - PW]);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            float* o = out.ptr() + oc * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                o[i] = static_cast<float>(acc[i]);
            }
        }
    });
    return out;
}

Shape transposed_conv3d_output_shape(const Shape& input, const ConvSpec& spec) {
    if (input.size() != 4) {
        throw ShapeError("transposed_conv3d expects [C,D,H,W] input, got " + to_string(input));
    }
    spec.validate();
    if (spec.groups != 1) {
        throw ShapeError("transposed_conv3d supports groups == 1 only");
    }
    if (input[0] != spec.in_channels) {
        throw ShapeError("transposed_conv3d input has " + std::to_string(input[0]) + " channels, spec expects " +
                         std::to_string(spec.in_channels));
    }
    auto axis = [](std::size_t in, std::size_t k, std::size_t s, std::size_t p, const char* name) {
        if (s == 0 || k < s) {
            throw ShapeError(std::string("transposed_conv3d needs kernel >= stride >= 1 on axis ") + name +
                             " (kernel " + std::to_string(k) + ", stride " + std::to_string(s) + ")");
        }
        const std::size_t full = (in - 1) * s + k;
        if (full <= 2 * p) {
            throw ShapeError(std::string("transposed_conv3d padding too large on axis ") + name);
        }
        return full - 2 * p;
    };
    return {spec.out_channels, axis(input[1], spec.kernel.d, spec.stride.d, spec.padding.d, "d"),
            axis(input[2], spec.kernel.h, spec.stride.h, spec.padding.h, "h"),
            axis(input[3], spec.kernel.w, spec.stride.w, spec.padding.w, "w")};
}

Tensor transposed_conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
    const Shape out_shape = transposed_conv3d_output_shape(x.shape(), spec);
    const Shape w_expected{spec.in_channels, spec.out_channels, spec.kernel.d, spec.kernel.h, spec.kernel.w};
    if (weight.shape() != w_expected) {
        throw ShapeError("transposed_conv3d weight shape " + to_string(weight.shape()) + ", expected " +
                         to_string(w_expected));
    }
    if (bias.size() != 0 && bias.shape() != Shape{spec.out_channels}) {
        throw ShapeError("transposed_conv3d bias shape " + to_string(bias.shape()));
    }
    const std::size_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::size_t OD = out_shape[1], OH = out_shape[2], OW = out_shape[3];
    const auto [KD, KH, KW] = spec.kernel;
    const auto [SD, SH, SW] = spec.stride;
    const auto [PD, PH, PW] = spec.padding;
    const std::size_t plane = OD * OH * OW;
    const std::size_t in_plane = D * H * W;
    const std::size_t ksize = KD * KH * KW;

    Tensor out(out_shape);
    // Gather form: out[o] = Σ_in Σ_k x[i]·w[k] where o = i*s + k - p.
    parallel_for(spec.out_channels, [&](std::size_t oc_begin, std::size_t oc_end) {
        std::vector<double> acc(plane);
        for (std::size_t oc = oc_begin; oc < oc_end; ++oc) {
            std::fill(acc.begin(), acc.end(), bias.size() ? static_cast<double>(bias[oc]) : 0.0);
            for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
                const float* src = x.ptr() + ic * in_plane;
                const float* wk = weight.ptr() + (ic * spec.out_channels + oc) * ksize;
                for (std::size_t id = 0; id < D; ++id) {
                    for (std::size_t kd = 0; kd < KD; ++kd) {
                        const std::size_t od = id * SD + kd;
                        if (od < PD || od - PD >= OD) continue;
                        for (std::size_t ih = 0; ih < H; ++ih) {
                            for (std::size_t kh = 0; kh < KH; ++kh) {
                                const std::size_t oh = ih * SH + kh;
                                if (oh < PH || oh - PH >= OH) continue;
                                double* dst = acc.data() + ((od - PD) * OH + (oh - PH)) * OW;
                                const float* row = src + (id * H + ih) * W;
                                for (std::size_t kw = 0; kw < KW; ++kw) {
                                    const double wv = wk[(kd * KH + kh) * KW + kw];
                                    for (std::size_t iw = 0; iw < W; ++iw) {
                                        const std::size_t ow = iw * SW + kw;
                                        if (ow < PW || ow - PW >= OW) continue;
                                        dst[ow - PW] += wv * static_cast<double>(row[iw]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            float* o = out.ptr() + oc * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                o[i] = static_cast<float>(acc[i]);
            }
        }
    });
    return out;
}

Tensor conv1d_depthwise_causal(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    require_rank(x, 2, "conv1d_depthwise_causal");
    const std::size_t C = x.dim(0), L = x.dim(1);
    if (weight.rank() != 2 || weight.dim(0) != C || weight.dim(1) == 0) {
        throw ShapeError("conv1d_depthwise_causal weight must be [" + std::to_string(C) + ", k>=1], got " +
                         to_string(weight.shape()));
    }
    if (bias.size() != 0 && bias.shape() != Shape{C}) {
        throw ShapeError("conv1d_depthwise_causal bias must be [" + std::to_string(C) + "]");
    }
    const std::size_t K = weight.dim(1);
    Tensor out({C, L});
    parallel_for(C, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            const float* src = x.ptr() + c * L;
            const float* w = weight.ptr() + c * K;
            float* dst = out.ptr() + c * L;
            const double b = bias.size() ? bias[c] : 0.0;
            for (std::size_t t = 0; t < L; ++t) {
                double acc = b;
                // tap j sees x[t - (K-1) + j]
                for (std::size_t j = 0; j < K; ++j) {
                    const std::size_t back = K - 1 - j;
                    if (back <= t) {
                        acc += static_cast<double>(w[j]) * src[t - back];
                    }
                }
                dst[t] = static_cast<float>(acc);
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Normalization

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    require_rank(x, 2, "layer_norm");
    const std::size_t L = x.dim(0), C = x.dim(1);
    if (gamma.shape() != Shape{C} || beta.shape() != Shape{C}) {
        throw ShapeError("layer_norm affine parameters must be [" + std::to_string(C) + "]");
    }
    Tensor out(x.shape());
    parallel_for(L, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const float* row = x.ptr() + r * C;
            double mean = 0.0;
            for (std::size_t c = 0; c < C; ++c) mean += row[c];
            mean /= static_cast<double>(C);
            double var = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double d = row[c] - mean;
                var += d * d;
            }
            var /= static_cast<double>(C);
            const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
            float* o = out.ptr() + r * C;
            for (std::size_t c = 0; c < C; ++c) {
                o[c] = static_cast<float>((row[c] - mean) * inv * gamma[c] + beta[c]);
            }
        }
    });
    return out;
}

Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    require_rank(x, 4, "instance_norm");
    const std::size_t C = x.dim(0);
    const std::size_t n = x.size() / std::max<std::size_t>(C, 1);
    if (gamma.shape() != Shape{C} || beta.shape() != Shape{C}) {
        throw ShapeError("instance_norm affine parameters must be [" + std::to_string(C) + "]");
    }
    Tensor out(x.shape());
    parallel_for(C, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            const float* src = x.ptr() + c * n;
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += src[i];
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = src[i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            const double scale = gamma[c] / std::sqrt(var + static_cast<double>(eps));
            const double shift = beta[c];
            float* o = out.ptr() + c * n;
            for (std::size_t i = 0; i < n; ++i) {
                o[i] = static_cast<float>((src[i] - mean) * scale + shift);
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise

namespace {

inline float apply_unary(float v, Unary kind) {
    switch (kind) {
    case Unary::sigmoid:
        return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    case Unary::silu:
        return static_cast<float>(v / (1.0 + std::exp(-static_cast<double>(v))));
    case Unary::relu:
        return v > 0.0f ? v : 0.0f;
    case Unary::gelu:
        return static_cast<float>(0.5 * v * (1.0 + std::erf(static_cast<double>(v) * M_SQRT1_2)));
    case Unary::softplus: {
        const double d = v;
        return static_cast<float>(d > 20.0 ? d : std::log1p(std::exp(d)));
    }
    case Unary::exp:
        return std::exp(v);
    case Unary::log:
        if (!(v > 0.0f)) {
            throw DomainError("log of non-positive value " + std::to_string(v));
        }
        return std::log(v);
    }
    return v;
}

} // namespace

void unary_inplace(Tensor& x, Unary kind) {
    if (kind == Unary::log) {
        for (float& v : x.data()) v = apply_unary(v, kind);
        return;
    }
    float* p = x.ptr();
    parallel_for(x.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) p[i] = apply_unary(p[i], kind);
    });
}

Tensor unary(const Tensor& x, Unary kind) {
    Tensor out = x;
    unary_inplace(out, kind);
    return out;
}

Tensor binary(const Tensor& a, const Tensor& b, Binary kind) {
    auto op = [kind](float l, float r) { return kind == Binary::add ? l + r : l * r; };
    if (a.shape() == b.shape()) {
        Tensor out(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
        return out;
    }
    Shape singleton = a.shape();
    if (!singleton.empty()) singleton[0] = 1;
    if (a.rank() == 0 || b.shape() != singleton) {
        throw ShapeError("binary op shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                         " are incompatible (only a singleton leading axis broadcasts)");
    }
    const std::size_t inner = b.size();
    Tensor out(a.shape());
    for (std::size_t c = 0; c < a.dim(0); ++c) {
        for (std::size_t i = 0; i < inner; ++i) {
            out[c * inner + i] = op(a[c * inner + i], b[i]);
        }
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    require_rank(x, 2, "linear");
    const std::size_t L = x.dim(0), CI = x.dim(1);
    if (weight.rank() != 2 || weight.dim(1) != CI) {
        throw ShapeError("linear weight " + to_string(weight.shape()) + " incompatible with input " +
                         to_string(x.shape()));
    }
    const std::size_t CO = weight.dim(0);
    if (bias.size() != 0 && bias.shape() != Shape{CO}) {
        throw ShapeError("linear bias " + to_string(bias.shape()) + ", expected [" + std::to_string(CO) + "]");
    }
    Tensor out({L, CO});
    parallel_for(L, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const float* row = x.ptr() + r * CI;
            float* o = out.ptr() + r * CO;
            for (std::size_t j = 0; j < CO; ++j) {
                const float* w = weight.ptr() + j * CI;
                double acc = bias.size() ? bias[j] : 0.0;
                for (std::size_t k = 0; k < CI; ++k) {
                    acc += static_cast<double>(row[k]) * w[k];
                }
                o[j] = static_cast<float>(acc);
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Layout

Tensor permute(const Tensor& x, std::span<const std::size_t> order) {
    const std::size_t rank = x.rank();
    if (order.size() != rank) {
        throw ShapeError("permute order has " + std::to_string(order.size()) + " axes, tensor has " +
                         std::to_string(rank));
    }
    std::vector<bool> seen(rank, false);
    for (std::size_t a : order) {
        if (a >= rank || seen[a]) {
            throw ShapeError("permute order is not a permutation of the tensor axes");
        }
        seen[a] = true;
    }
    std::vector<std::size_t> in_stride(rank, 1);
    for (std::size_t i = rank; i-- > 1;) in_stride[i - 1] = in_stride[i] * x.dim(i);
    Shape out_shape(rank);
    std::vector<std::size_t> src_stride(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        out_shape[i] = x.dim(order[i]);
        src_stride[i] = in_stride[order[i]];
    }
    Tensor out(out_shape);
    if (x.size() == 0) return out;
    std::vector<std::size_t> idx(rank, 0);
    std::size_t src = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[src];
        for (std::size_t a = rank; a-- > 0;) {
            if (++idx[a] < out_shape[a]) {
                src += src_stride[a];
                break;
            }
            src -= src_stride[a] * (out_shape[a] - 1);
            idx[a] = 0;
        }
    }
    return out;
}

Tensor permute(const Tensor& x, std::initializer_list<std::size_t> order) {
    return permute(x, std::span<const std::size_t>(order.begin(), order.size()));
}

Tensor reduce_mean(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw ShapeError("reduce_mean axis " + std::to_string(axis) + " invalid for shape " + to_string(x.shape()));
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
    const std::size_t n = x.dim(axis);
    Shape out_shape = x.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
    Tensor out(out_shape);
    std::vector<double> acc(inner);
    for (std::size_t o = 0; o < outer; ++o) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const float* src = x.ptr() + (o * n + k) * inner;
            for (std::size_t i = 0; i < inner; ++i) acc[i] += src[i];
        }
        for (std::size_t i = 0; i < inner; ++i) {
            out[o * inner + i] = static_cast<float>(acc[i] / static_cast<double>(n));
        }
    }
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.rank() == 0 || a.rank() != b.rank() ||
        !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
        throw ShapeError("concat_channels shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                         " differ beyond the channel axis");
    }
    Shape s = a.shape();
    s[0] += b.dim(0);
    std::vector<float> data;
    data.reserve(a.size() + b.size());
    data.insert(data.end(), a.data().begin(), a.data().end());
    data.insert(data.end(), b.data().begin(), b.data().end());
    return Tensor(std::move(s), std::move(data));
}

} // namespace segmamba
