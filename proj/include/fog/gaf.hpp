#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fog/error.hpp"
#include "fog/png.hpp"
#include "fog/tensor.hpp"

namespace fog {

// Which rescaled variable feeds arccos: the bipolar x'' in [-1,1] (standard,
// full [0,π] angular range) or the unit-interval x' in [0,1].
enum class AngleSource { bipolar, unit };

inline std::string angle_source_name(AngleSource s) {
    return s == AngleSource::bipolar ? "bipolar" : "unit";
}

inline AngleSource angle_source_from_name(std::string_view name) {
    if (name == "bipolar") return AngleSource::bipolar;
    if (name == "unit") return AngleSource::unit;
    throw BadConfig("unknown angle source: " + std::string(name));
}

// Angular form of a rescaled series. value[i] = cos(theta[i]) is kept so the
// Gram matrix can be formed without re-evaluating trigonometry.
struct PolarEncoding {
    std::vector<double> theta;
    std::vector<double> radius;
    std::vector<double> value;

    std::size_t size() const { return theta.size(); }
};

// Symmetric Gram matrix of a polar-encoded series, entries in [-1,1].
struct GafImage {
    std::vector<double> matrix;
    std::size_t n = 0;
    std::string channel_name;
    std::string subject_id;
    std::int64_t start_index = 0;

    double at(std::size_t i, std::size_t j) const { return matrix[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return matrix[i * n + j]; }
};

// Piecewise aggregate reduction: output[k] is the mean of the k-th block of
// len/target consecutive samples.
inline std::vector<double> paa_reduce(const std::vector<double>& series, std::size_t target) {
    if (target == 0 || series.empty() || series.size() % target != 0) {
        throw BadLength("series length " + std::to_string(series.size()) +
                        " not divisible by target " + std::to_string(target));
    }
    std::size_t block = series.size() / target;
    std::vector<double> out(target);
    for (std::size_t k = 0; k < target; ++k) {
        double sum = 0.0;
        for (std::size_t i = k * block; i < (k + 1) * block; ++i) sum += series[i];
        out[k] = sum / static_cast<double>(block);
    }
    return out;
}

// Min-max rescale onto [-1,1]. A constant series has no range and maps to
// all zeros.
inline std::vector<double> rescale_bipolar(const std::vector<double>& series) {
    if (series.empty()) throw BadLength("cannot rescale an empty series");
    auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(series.size());
    if (lo == hi) return out;
    for (std::size_t i = 0; i < series.size(); ++i) {
        out[i] = 2.0 * ((series[i] - lo) / (hi - lo)) - 1.0;
    }
    return out;
}

// Min-max rescale onto [0,1], same degenerate rule as rescale_bipolar.
inline std::vector<double> rescale_unit(const std::vector<double>& series) {
    if (series.empty()) throw BadLength("cannot rescale an empty series");
    auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(series.size());
    if (lo == hi) return out;
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - lo) / (hi - lo);
    return out;
}

// theta[i] = arccos(x[i]), radius[i] = (i+1)/n. Values up to 1e-9 outside
// [-1,1] are rounding noise and get clamped; anything further is rejected.
inline PolarEncoding polar_encode(const std::vector<double>& x) {
    if (x.empty()) throw BadLength("cannot encode an empty series");
    PolarEncoding p;
    p.theta.resize(x.size());
    p.radius.resize(x.size());
    p.value.resize(x.size());
    double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (std::abs(v) > 1.0 + 1e-9 || std::isnan(v)) {
            throw OutOfRange("polar encoding input " + std::to_string(v) + " outside [-1,1]");
        }
        v = std::clamp(v, -1.0, 1.0);
        p.value[i] = v;
        p.theta[i] = std::acos(v);
        p.radius[i] = static_cast<double>(i + 1) / n;
    }
    return p;
}

// Gram matrix g[i][j] = cos(theta_i + theta_j), evaluated in the algebraic
// form v_i v_j − sqrt(1−v_i²) sqrt(1−v_j²). Only the upper triangle is
// computed; mirroring makes symmetry exact, and a final clamp keeps rounding
// from pushing entries past ±1.
inline GafImage gasf(const PolarEncoding& p) {
    GafImage img;
    img.n = p.size();
    img.matrix.resize(img.n * img.n);
    std::vector<double> sine(img.n);
    for (std::size_t i = 0; i < img.n; ++i) {
        sine[i] = std::sqrt(std::max(0.0, 1.0 - p.value[i] * p.value[i]));
    }
    for (std::size_t i = 0; i < img.n; ++i) {
        for (std::size_t j = i; j < img.n; ++j) {
            double g = p.value[i] * p.value[j] - sine[i] * sine[j];
            g = std::clamp(g, -1.0, 1.0);
            img.at(i, j) = g;
            img.at(j, i) = g;
        }
    }
    return img;
}

// Full window-channel transform: reduce to target_n points, rescale, encode,
// form the Gram matrix.
inline GafImage gasf_from_series(const std::vector<double>& series, std::size_t target_n = 64,
                                 AngleSource source = AngleSource::bipolar) {
    auto reduced = paa_reduce(series, target_n);
    auto rescaled = source == AngleSource::bipolar ? rescale_bipolar(reduced)
                                                   : rescale_unit(reduced);
    return gasf(polar_encode(rescaled));
}

// Network input: the GASF plane replicated across 3 image channels.
inline Tensor<float> to_input_tensor(const GafImage& img) {
    int n = static_cast<int>(img.n);
    auto t = Tensor<float>::zeros4(1, n, n, 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            float v = static_cast<float>(img.at(static_cast<std::size_t>(i),
                                                static_cast<std::size_t>(j)));
            t.at(0, i, j, 0) = v;
            t.at(0, i, j, 1) = v;
            t.at(0, i, j, 2) = v;
        }
    }
    return t;
}

// Maps [-1,1] onto 8-bit gray with half-up rounding: -1 -> 0, 0 -> 128,
// +1 -> 255.
inline unsigned char gray_pixel(double v) {
    double scaled = (v + 1.0) / 2.0 * 255.0;
    double rounded = std::floor(scaled + 0.5);
    return static_cast<unsigned char>(std::clamp(rounded, 0.0, 255.0));
}

inline std::vector<unsigned char> export_png(const GafImage& img) {
    std::vector<unsigned char> pixels(img.n * img.n);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = gray_pixel(img.matrix[i]);
    return encode_png_gray8(img.n, img.n, pixels);
}

struct DiffCell {
    std::size_t i = 0;
    std::size_t j = 0;
    double diff = 0.0;
};

// The top_k cells by absolute difference, ties resolved by (i,j) order so
// the result is deterministic.
inline std::vector<DiffCell> gaf_difference(const GafImage& a, const GafImage& b,
                                            std::size_t top_k = 15) {
    if (a.n != b.n) {
        throw ShapeMismatch("gaf difference needs equal sizes, got " + std::to_string(a.n) +
                            " and " + std::to_string(b.n));
    }
    std::vector<DiffCell> cells;
    cells.reserve(a.n * a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = 0; j < a.n; ++j) {
            cells.push_back({i, j, std::abs(a.at(i, j) - b.at(i, j))});
        }
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [](const DiffCell& x, const DiffCell& y) { return x.diff > y.diff; });
    if (cells.size() > top_k) cells.resize(top_k);
    return cells;
}

}  // namespace fog
