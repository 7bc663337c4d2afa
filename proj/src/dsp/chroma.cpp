// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/chroma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace teadapter::dsp {

int pitch_class_of_frequency(double hz) {
    require(hz > 0.0, ErrorCode::kInvalidArgument, "frequency must be positive");
    const long semitones_from_a4 = std::lround(12.0 * std::log2(hz / 440.0));
    const long pc = (semitones_from_a4 + 9) % 12;
    return static_cast<int>(pc < 0 ? pc + 12 : pc);
}

Chromagram chromagram_from_spectrogram(const Spectrogram& spec) {
    std::vector<int> bin_class(static_cast<std::size_t>(spec.bins), -1);
    for (int b = 1; b < spec.bins; ++b) {
        const double hz = spec.bin_frequency(b);
        if (hz >= kChromaMinHz && hz <= kChromaMaxHz) {
            bin_class[static_cast<std::size_t>(b)] = pitch_class_of_frequency(hz);
        }
    }
    Chromagram chroma;
    chroma.hop_size = spec.hop_size;
    chroma.sample_rate = spec.sample_rate;
    chroma.energies.assign(static_cast<std::size_t>(spec.frames), ChromaFrame{});
    for (int f = 0; f < spec.frames; ++f) {
        auto& frame = chroma.energies[static_cast<std::size_t>(f)];
        for (int b = 0; b < spec.bins; ++b) {
            const int pc = bin_class[static_cast<std::size_t>(b)];
            if (pc >= 0) {
                const double m = spec.at(f, b);
                frame[static_cast<std::size_t>(pc)] += m * m;
            }
        }
    }
    return chroma;
}

Chromagram chromagram(const AudioClip& clip, int hop_size) {
    StftOptions options;
    options.window_size = kChromaWindow;
    options.hop_size = hop_size;
    return chromagram_from_spectrogram(stft(clip, options));
}

Chromagram max_normalize(const Chromagram& chroma) {
    Chromagram out = chroma;
    for (auto& frame : out.energies) {
        const double m = *std::max_element(frame.begin(), frame.end());
        if (m > 0.0) {
            for (auto& v : frame) {
                v /= m;
            }
        }
    }
    return out;
}

// --- hpss ----------------------------------------------------------------

HpssMasks hpss_masks(const Spectrogram& spec, int harm_kernel, int perc_kernel) {
    require(harm_kernel >= 3 && harm_kernel % 2 == 1 && perc_kernel >= 3 && perc_kernel % 2 == 1,
            ErrorCode::kInvalidArgument, "hpss kernels must be odd and >= 3");
    require(harm_kernel <= spec.frames, ErrorCode::kKernelTooLarge,
            "harmonic kernel " + std::to_string(harm_kernel) + " exceeds " + std::to_string(spec.frames) + " frames");
    require(perc_kernel <= spec.bins, ErrorCode::kKernelTooLarge,
            "percussive kernel " + std::to_string(perc_kernel) + " exceeds " + std::to_string(spec.bins) + " bins");

    const std::size_t count = spec.magnitudes.size();
    std::vector<double> harmonic(count), percussive(count);
    std::vector<double> line(static_cast<std::size_t>(spec.frames));
    for (int b = 0; b < spec.bins; ++b) {
        for (int f = 0; f < spec.frames; ++f) {
            line[static_cast<std::size_t>(f)] = spec.at(f, b);
        }
        const auto filtered = median_filter(line, harm_kernel);
        for (int f = 0; f < spec.frames; ++f) {
            harmonic[static_cast<std::size_t>(f) * spec.bins + b] = filtered[static_cast<std::size_t>(f)];
        }
    }
    line.resize(static_cast<std::size_t>(spec.bins));
    for (int f = 0; f < spec.frames; ++f) {
        std::copy_n(spec.magnitudes.begin() + static_cast<long>(f) * spec.bins, spec.bins, line.begin());
        const auto filtered = median_filter(line, perc_kernel);
        std::copy(filtered.begin(), filtered.end(), percussive.begin() + static_cast<long>(f) * spec.bins);
    }

    HpssMasks masks;
    masks.harmonic.resize(count);
    masks.percussive.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double h2 = harmonic[i] * harmonic[i];
        const double p2 = percussive[i] * percussive[i];
        const double denom = h2 + p2;
        if (denom <= 0.0) {
            masks.harmonic[i] = 0.5;
            masks.percussive[i] = 0.5;
        } else {
            masks.harmonic[i] = h2 / denom;
            masks.percussive[i] = 1.0 - masks.harmonic[i];
        }
    }
    return masks;
}

std::pair<Spectrogram, Spectrogram> hpss(const Spectrogram& spec, int harm_kernel, int perc_kernel) {
    const HpssMasks masks = hpss_masks(spec, harm_kernel, perc_kernel);
    Spectrogram harmonic = spec;
    Spectrogram percussive = spec;
    for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) {
        harmonic.magnitudes[i] = spec.magnitudes[i] * masks.harmonic[i];
        percussive.magnitudes[i] = spec.magnitudes[i] * masks.percussive[i];
    }
    return {std::move(harmonic), std::move(percussive)};
}

// --- smoothing -----------------------------------------------------------

std::vector<double> median_filter(const std::vector<double>& values, int width) {
    require(width >= 1 && width % 2 == 1, ErrorCode::kInvalidWidth, "median width must be odd and >= 1");
    const long n = static_cast<long>(values.size());
    if (width == 1 || n == 0) {
        return values;
    }
    const long half = width / 2;
    auto mirrored = [n](long i) {
        // Half-sample symmetric: (c b a | a b c | c b a).
        const long period = 2 * n;
        long m = i % period;
        if (m < 0) {
            m += period;
        }
        return m < n ? m : period - 1 - m;
    };
    std::vector<double> out(values.size());
    std::vector<double> window(static_cast<std::size_t>(width));
    for (long i = 0; i < n; ++i) {
        for (long k = -half; k <= half; ++k) {
            window[static_cast<std::size_t>(k + half)] = values[static_cast<std::size_t>(mirrored(i + k))];
        }
        std::nth_element(window.begin(), window.begin() + half, window.end());
        out[static_cast<std::size_t>(i)] = window[static_cast<std::size_t>(half)];
    }
    return out;
}

Chromagram median_smooth_time(const Chromagram& chroma, int width) {
    require(width >= 1 && width % 2 == 1, ErrorCode::kInvalidWidth,
            "median width must be odd, got " + std::to_string(width));
    Chromagram out = chroma;
    std::vector<double> row(chroma.energies.size());
    for (int pc = 0; pc < kPitchClasses; ++pc) {
        for (std::size_t f = 0; f < row.size(); ++f) {
            row[f] = chroma.energies[f][static_cast<std::size_t>(pc)];
        }
        const auto filtered = median_filter(row, width);
        for (std::size_t f = 0; f < row.size(); ++f) {
            out.energies[f][static_cast<std::size_t>(pc)] = filtered[f];
        }
    }
    return out;
}

Chromagram nn_smooth(const Chromagram& chroma, int k) {
    const int frames = chroma.frames();
    require(k >= 1, ErrorCode::kInvalidArgument, "neighbor count must be >= 1");
    require(k <= frames, ErrorCode::kKTooLarge,
            "k = " + std::to_string(k) + " exceeds " + std::to_string(frames) + " frames");
    if (k == 1) {
        return chroma;
    }
    std::vector<double> norms(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        const auto& v = chroma.energies[static_cast<std::size_t>(f)];
        norms[static_cast<std::size_t>(f)] = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    }
    Chromagram out = chroma;
    std::vector<int> order(static_cast<std::size_t>(frames));
    std::vector<double> similarity(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        const auto& v = chroma.energies[static_cast<std::size_t>(f)];
        for (int g = 0; g < frames; ++g) {
            double s = 0.0;
            if (g == f) {
                s = 1.0;
            } else if (norms[static_cast<std::size_t>(f)] > 0.0 && norms[static_cast<std::size_t>(g)] > 0.0) {
                const auto& u = chroma.energies[static_cast<std::size_t>(g)];
                s = std::inner_product(v.begin(), v.end(), u.begin(), 0.0) /
                    (norms[static_cast<std::size_t>(f)] * norms[static_cast<std::size_t>(g)]);
            }
            similarity[static_cast<std::size_t>(g)] = s;
        }
        std::iota(order.begin(), order.end(), 0);
        // Highest similarity first; self wins ties, then temporal proximity.
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            const double sa = similarity[static_cast<std::size_t>(a)];
            const double sb = similarity[static_cast<std::size_t>(b)];
            if (sa != sb) {
                return sa > sb;
            }
            const int da = std::abs(a - f), db = std::abs(b - f);
            if (da != db) {
                return da < db;
            }
            return a < b;
        });
        ChromaFrame mean{};
        for (int i = 0; i < k; ++i) {
            const auto& u = chroma.energies[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            for (int pc = 0; pc < kPitchClasses; ++pc) {
                mean[static_cast<std::size_t>(pc)] += u[static_cast<std::size_t>(pc)];
            }
        }
        for (auto& m : mean) {
            m /= k;
        }
        out.energies[static_cast<std::size_t>(f)] = mean;
    }
    return out;
}

}  // namespace teadapter::dsp
