// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <complex>
#include <numeric>

#include "doctest.h"
#include "dsp/audio.hpp"
#include "dsp/chroma.hpp"
#include "dsp/fft.hpp"
#include "dsp/mel.hpp"
#include "dsp/stft.hpp"
#include "dsp/wav.hpp"
#include "features/chords.hpp"
#include "synth/synth.hpp"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;

namespace {

std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

int argmax(const dsp::ChromaFrame& f) {
    return static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
}

dsp::ChromaFrame mean_chroma(const dsp::Chromagram& c) {
    dsp::ChromaFrame sum{};
    for (const auto& f : c.energies) {
        for (int p = 0; p < 12; ++p) {
            sum[static_cast<std::size_t>(p)] += f[static_cast<std::size_t>(p)];
        }
    }
    return sum;
}

std::vector<double> naive_median(const std::vector<double>& v, int width) {
    const int n = static_cast<int>(v.size());
    const int half = width / 2;
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        std::vector<double> w;
        for (int k = -half; k <= half; ++k) {
            int j = i + k;
            // Half-sample symmetric reflection.
            while (j < 0 || j >= n) {
                j = j < 0 ? -j - 1 : 2 * n - j - 1;
            }
            w.push_back(v[static_cast<std::size_t>(j)]);
        }
        std::nth_element(w.begin(), w.begin() + half, w.end());
        out[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(half)];
    }
    return out;
}

}  // namespace

TEST_CASE("rfft matches a direct DFT") {
    Rng rng(3);
    std::vector<double> x(96);
    for (auto& v : x) {
        v = rng.uniform(-1.0, 1.0);
    }
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    dsp::rfft(x, out);
    const auto ref = naive_dft(x);
    for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(std::abs(out[k] - ref[k]) < 1e-9);
    }
}

TEST_CASE("irfft inverts rfft up to the length factor") {
    Rng rng(4);
    std::vector<double> x(128);
    for (auto& v : x) {
        v = rng.normal();
    }
    std::vector<std::complex<double>> spec(65);
    std::vector<double> back(128);
    dsp::rfft(x, spec);
    dsp::irfft(spec, back);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(back[i] / 128.0 == doctest::Approx(x[i]).epsilon(1e-12));
    }
}

TEST_CASE("a sine on an exact bin peaks on that bin") {
    // 16 kHz, 1024-point window: bin k sits at k * 15.625 Hz.
    for (int k : {56, 113}) {
        const auto clip = testing::sine(k * 15.625, 1.0);
        const auto spec = dsp::stft(clip, 1024, 256);
        const int mid = spec.frames / 2;
        int best = 0;
        for (int b = 1; b < spec.bins; ++b) {
            if (spec.at(mid, b) > spec.at(mid, best)) {
                best = b;
            }
        }
        CHECK(best == k);
    }
}

TEST_CASE("istft reconstructs the signal") {
    const auto clip = testing::sine(440.0, 0.5, 0.3);
    dsp::StftOptions opt;
    opt.window_size = 512;
    opt.hop_size = 128;
    const auto spec = dsp::stft_complex(clip, opt);
    const auto back = dsp::istft(spec, opt, clip.samples.size());
    REQUIRE(back.size() == clip.samples.size());
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
        err = std::max(err, std::abs(back[i] - clip.samples[i]));
    }
    CHECK(err < 1e-9);
}

TEST_CASE("stft rejects empty and non-finite audio") {
    dsp::AudioClip empty;
    CHECK(code_of([&] { dsp::stft(empty, 512, 128); }) == ErrorCode::kEmptyInput);
    auto bad = testing::sine(100.0, 0.1);
    bad.samples[10] = std::nan("");
    CHECK(code_of([&] { dsp::stft(bad, 512, 128); }) == ErrorCode::kInvalidAudio);
}

TEST_CASE("mel scale round trip and filter peaks") {
    for (double hz : {0.0, 100.0, 440.0, 1000.0, 7999.0}) {
        CHECK(dsp::mel_to_hz(dsp::hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
    }
    dsp::MelConfig cfg;
    const auto fb = dsp::mel_filterbank(cfg);
    for (int m = 0; m < fb.n_mels; ++m) {
        double peak = 0.0;
        for (int b = 0; b < fb.bins; ++b) {
            peak = std::max(peak, fb.weight(m, b));
        }
        CHECK(peak <= 1.0 + 1e-12);
        CHECK(peak > 0.0);
    }
}

TEST_CASE("silence has all-zero mel features, padded frames too") {
    dsp::AudioClip silence;
    silence.samples.assign(8000, 0.0);
    dsp::MelConfig cfg;
    const auto f = dsp::mel_features(silence, cfg, 200);
    CHECK(f.size() == 200u * 64u);
    CHECK(std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("chromagram identifies all 12 pitch classes across octaves 3-5") {
    const auto& profile = synth::builtin_profile("sine");
    for (int octave = 3; octave <= 5; ++octave) {
        for (int pc = 0; pc < 12; ++pc) {
            const auto clip = synth::synthesize_note(pc, octave, 1.0, profile);
            CAPTURE(octave);
            CAPTURE(pc);
            CHECK(argmax(mean_chroma(dsp::chromagram(clip))) == pc);
        }
    }
}

TEST_CASE("template matching recovers all 24 clean triads") {
    const auto& profile = synth::builtin_profile("piano");
    int correct = 0;
    for (int root = 0; root < 12; ++root) {
        for (auto q : {features::ChordQuality::kMajor, features::ChordQuality::kMinor}) {
            features::ChordProgression prog;
            prog.entries.push_back({0, 0.0, 2.0, root, q});
            const auto clip = synth::render_chords(prog, profile);
            int r = -1;
            features::ChordQuality got{};
            REQUIRE(features::match_triad(mean_chroma(dsp::chromagram(clip)), r, got));
            correct += (r == root && got == q) ? 1 : 0;
        }
    }
    CHECK(correct == 24);
}

TEST_CASE("match_triad rejects a flat profile and prefers the lower root on ties") {
    dsp::ChromaFrame flat;
    flat.fill(1.0);
    int root = -1;
    features::ChordQuality q{};
    CHECK_FALSE(features::match_triad(flat, root, q));
    const auto t = features::triad_template(7, features::ChordQuality::kMinor);
    dsp::ChromaFrame f;
    std::copy(t.begin(), t.end(), f.begin());
    REQUIRE(features::match_triad(f, root, q));
    CHECK(root == 7);
    CHECK(q == features::ChordQuality::kMinor);
}

TEST_CASE("hpss masks are complementary and separate tones from clicks") {
    auto tone = testing::sine(523.25, 2.0, 0.4);
    const auto click = testing::clicks(testing::regular_times(0.1, 0.25, 2.0), 2.0);
    const auto spec_tone = dsp::stft(tone, 1024, 256);
    const auto masks = dsp::hpss_masks(spec_tone, 17, 17);
    for (std::size_t i = 0; i < masks.harmonic.size(); ++i) {
        CHECK(masks.harmonic[i] + masks.percussive[i] == doctest::Approx(1.0));
    }
    auto energy = [](const dsp::Spectrogram& s) {
        return std::accumulate(s.magnitudes.begin(), s.magnitudes.end(), 0.0,
                               [](double a, double m) { return a + m * m; });
    };
    const auto [th, tp] = dsp::hpss(spec_tone, 17, 17);
    CHECK(energy(th) > 10.0 * energy(tp));
    const auto [ch, cp] = dsp::hpss(dsp::stft(click, 1024, 256), 17, 17);
    CHECK(energy(cp) > energy(ch));
}

TEST_CASE("hpss kernel larger than the spectrogram is rejected") {
    const auto spec = dsp::stft(testing::sine(440.0, 0.1), 512, 256);
    CHECK(code_of([&] { dsp::hpss_masks(spec, spec.frames + 2, 3); }) == ErrorCode::kKernelTooLarge);
}

TEST_CASE("median filter matches a direct oracle") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(rng.uniform_int(1, 40)));
        for (auto& x : v) {
            x = rng.uniform(-5.0, 5.0);
        }
        const int width = 2 * rng.uniform_int(0, 4) + 1;
        CHECK(dsp::median_filter(v, width) == naive_median(v, width));
    }
    CHECK(code_of([] { dsp::median_filter({1.0, 2.0}, 4); }) == ErrorCode::kInvalidWidth);
}

TEST_CASE("nearest-neighbour chroma smoothing") {
    dsp::Chromagram c;
    Rng rng(2);
    for (int i = 0; i < 6; ++i) {
        dsp::ChromaFrame f;
        for (auto& v : f) {
            v = rng.uniform();
        }
        c.energies.push_back(f);
    }
    const auto same = dsp::nn_smooth(c, 1);
    for (int i = 0; i < 6; ++i) {
        for (int p = 0; p < 12; ++p) {
            CHECK(same.energies[i][p] == doctest::Approx(c.energies[i][p]));
        }
    }
    CHECK(code_of([&] { dsp::nn_smooth(c, 7); }) == ErrorCode::kKTooLarge);
    CHECK(code_of([&] { dsp::median_smooth_time(c, 2); }) == ErrorCode::kInvalidWidth);
}

TEST_CASE("wav round trips") {
    const auto clip = testing::sine(330.0, 0.2, 0.6);
    const auto pcm = dsp::decode_wav(dsp::encode_wav(clip));
    REQUIRE(pcm.samples.size() == clip.samples.size());
    CHECK(pcm.sample_rate == clip.sample_rate);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        // Encode scales by 32767, decode by 32768: rounding plus a gain offset.
        CHECK(std::abs(pcm.samples[i] - clip.samples[i]) <= 2.0 / 32767.0);
    }
    const auto f32 = dsp::decode_wav(dsp::encode_wav(clip, dsp::WavFormat::kFloat32));
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        CHECK(f32.samples[i] == static_cast<double>(static_cast<float>(clip.samples[i])));
    }
}

TEST_CASE("corrupt wav raises DecodeError") {
    std::vector<std::uint8_t> junk(64, 7);
    CHECK(code_of([&] { dsp::decode_wav(junk); }) == ErrorCode::kDecodeError);
    auto bytes = dsp::encode_wav(testing::sine(200.0, 0.05));
    bytes.resize(30);
    CHECK(code_of([&] { dsp::decode_wav(bytes); }) == ErrorCode::kDecodeError);
}

TEST_CASE("stereo files are averaged to mono") {
    const auto dir = testing::scratch_dir("stereo");
    const std::vector<double> left{0.5, -0.5, 0.25, 0.0};
    const std::vector<double> right{0.5, 0.5, -0.25, 1.0};
    dsp::write_wav_pcm16_multichannel(dir / "s.wav", {left, right}, 8000.0);
    const auto clip = dsp::read_wav(dir / "s.wav");
    REQUIRE(clip.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(clip.samples[i] == doctest::Approx((left[i] + right[i]) / 2.0).epsilon(1e-4));
    }
}

TEST_CASE("resampling keeps the pitch and the duration") {
    const auto clip = testing::sine(1000.0, 1.0, 0.5, 44100.0);
    const auto down = dsp::resample(clip, 16000.0);
    CHECK(down.sample_rate == 16000.0);
    CHECK(down.samples.size() == 16000u);
    const auto spec = dsp::stft(down, 1024, 256);
    int best = 0;
    for (int b = 1; b < spec.bins; ++b) {
        if (spec.at(spec.frames / 2, b) > spec.at(spec.frames / 2, best)) {
            best = b;
        }
    }
    CHECK(best == 64);  // 1000 Hz / 15.625 Hz
    const auto same = dsp::resample(down, 16000.0);
    CHECK(same.samples == down.samples);
}

TEST_CASE("fit_length pads with zeros and truncates") {
    const auto clip = testing::sine(100.0, 0.5);
    const auto padded = dsp::fit_length(clip, 16000);
    CHECK(padded.samples.size() == 16000u);
    CHECK(std::equal(clip.samples.begin(), clip.samples.end(), padded.samples.begin()));
    CHECK(std::all_of(padded.samples.begin() + 8000, padded.samples.end(), [](double v) { return v == 0.0; }));
    CHECK(dsp::fit_length(clip, 100).samples.size() == 100u);
}
