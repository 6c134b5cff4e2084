#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpdsss/analysis.hpp"
#include "cpdsss/channel.hpp"
#include "cpdsss/errors.hpp"
#include "cpdsss/rng.hpp"
#include "cpdsss/rx.hpp"
#include "cpdsss/tx.hpp"
#include "cpdsss/zc.hpp"

using namespace cpdsss;

namespace {

CVec random_vec(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, {n});
    CVec y(n);
    for (auto& v : y) v = rng.complex_normal(1.0);
    return y;
}

}  // namespace

TEST_CASE("FFT despreading equals the dense correlator") {
    for (int n : {16, 64, 100, 1024}) {
        const auto basis = generate_zc(n);
        const auto y = random_vec(static_cast<std::size_t>(n), 9);
        const auto a = despread_full(basis, y);
        const auto b = despread_direct(basis, y);
        double worst = 0.0;
        for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("despreading a shifted code gives a unit impulse") {
    const auto basis = generate_zc(64);
    const Despreader d(basis);
    const auto yp = d.despread(cyclic_shift(basis, 17));
    for (int k = 0; k < 64; ++k) CHECK(std::abs(yp[k] - cdouble(k == 17 ? 1.0 : 0.0)) < 1e-12);
    CHECK_THROWS_AS(d.despread(CVec(63)), InvalidArgument);
}

TEST_CASE("operation counts") {
    CHECK(fft_despread_op_count(1024) == 11264);
    CHECK(direct_despread_op_count(1024) == 1048576);
    CHECK(double(fft_despread_op_count(1024)) / double(direct_despread_op_count(1024)) ==
          doctest::Approx(0.0107421875));
}

TEST_CASE("noise-free despread windows carry the channel taps") {
    const int n = 1024, l = 40, k = 3;
    const auto basis = generate_zc(n);
    const auto assign = allocate_codes(1, k, l, n)[0];
    const std::vector<int> bits{1, -1, -1, 1};
    const double amp = 0.7;
    RngStream rng(4, {0});
    ChannelRealization h;
    h.taps.resize(30);
    for (auto& v : h.taps) v = rng.complex_normal(1.0);
    const auto y = circular_convolve(build_message(basis, assign, bits, amp), h.taps);
    const auto ds = extract_user(despread_full(basis, y), assign, l);
    REQUIRE(ds.vectors.size() == 4);
    for (int b = 0; b <= k; ++b)
        for (int t = 0; t < l; ++t) {
            const cdouble want = t < 30 ? amp * bits[b] * h.taps[t] : cdouble{};
            CHECK(std::abs(ds.vectors[b][t] - want) < 1e-12);
        }
    const auto rec = recover_bits(ds);
    CHECK(rec.hard_bits == std::vector<int>{-1, -1, 1});
}

TEST_CASE("extract_user wraps cyclically") {
    CVec yp(16);
    for (int i = 0; i < 16; ++i) yp[i] = cdouble(i, 0);
    CodeAssignment a{0, {14, 2}, 1, 3};
    const auto ds = extract_user(yp, a, 3);
    CHECK(ds.vectors[0] == CVec{{14, 0}, {15, 0}, {0, 0}});
    CHECK(ds.vectors[1] == CVec{{2, 0}, {3, 0}, {4, 0}});
}

TEST_CASE("decision statistics enumerate every pair") {
    for (int k : {1, 2, 10}) {
        DespreadSet ds;
        ds.l_taps = 5;
        for (int i = 0; i <= k; ++i) ds.vectors.push_back(random_vec(5, 100 + i));
        const auto st = decision_stats(ds);
        CHECK(st.n_pairs() == pair_count(k));
        for (std::size_t p = 0; p < st.pairs.size(); ++p) {
            const auto [i, j] = st.pairs[p];
            CHECK(i < j);
            cdouble acc{};
            for (int t = 0; t < 5; ++t) acc += std::conj(ds.vectors[i][t]) * ds.vectors[j][t];
            CHECK(st.c_values[p] == doctest::Approx(std::abs(acc.real())));
        }
    }
    DespreadSet only_ref;
    only_ref.vectors.push_back(CVec(5));
    CHECK_THROWS_AS(decision_stats(only_ref), UnsupportedConfig);
    CHECK_THROWS_AS(recover_bits(only_ref), UnsupportedConfig);
}

TEST_CASE("M-of-n detection uses strict exceedance") {
    DecisionStats st;
    st.c_values = {1.0, 2.0, 3.0};
    st.pairs = {{0, 1}, {0, 2}, {1, 2}};
    CHECK(count_exceedances(st, 2.0) == 1);
    CHECK(count_exceedances(st, 0.5) == 3);
    CHECK(detect(st, 1, 2.0).detected);
    CHECK_FALSE(detect(st, 2, 2.0).detected);
    CHECK(detect(st, 2, 1.5).detected);
    CHECK_FALSE(detect(st, 1, 3.0).detected);
    CHECK_THROWS_AS(detect(st, 0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(detect(st, 4, 1.0), InvalidArgument);

    DetectorDesign d;
    d.m_of_n = 1;
    d.eta = 2.5;
    CHECK(detect(st, d).exceed_count == 1);
}

TEST_CASE("zero soft metric maps to +1") {
    DespreadSet ds;
    ds.vectors = {CVec{{1, 0}}, CVec{{0, 1}}, CVec{{-2, 0}}};
    const auto r = recover_bits(ds);
    CHECK(r.hard_bits == std::vector<int>{1, -1});
    CHECK(r.soft_metrics[0] == 0.0);
    CHECK(r.soft_metrics[1] == -2.0);
}

TEST_CASE("receive_user end to end") {
    const int n = 1024, l = 40, k = 4;
    const auto basis = generate_zc(n);
    const auto assign = allocate_codes(1, k, l, n)[0];
    const std::vector<int> bits{1, 1, -1, -1, 1};
    const auto design = design_detector(1e-3, k, 1, l, 1.0);
    RngStream rng(21, {7});
    ChannelRealization h;
    h.taps = {cdouble(0.8, 0.1), cdouble(-0.3, 0.4), cdouble(0.2, 0.0)};

    const auto clean = circular_convolve(build_message(basis, assign, bits, 8.0), h.taps);
    const auto y = superpose(std::vector<CVec>{clean}, NoiseSpec{1.0}, rng);
    const auto out = receive_user(despread_full(basis, y), assign, l, 1, design.eta);
    CHECK(out.detected);
    CHECK(out.hard_bits == std::vector<int>{1, -1, -1, 1});

    const auto noise = superpose({}, NoiseSpec{1.0}, rng, n);
    const auto miss = receive_user(despread_full(basis, noise), assign, l, 1, 1e6);
    CHECK_FALSE(miss.detected);
    CHECK(miss.hard_bits.empty());
}

TEST_CASE("noise power estimate") {
    CHECK(estimate_noise_power(CVec{}) == 0.0);
    CHECK(estimate_noise_power(CVec{{3, 4}, {0, 0}}) == doctest::Approx(12.5));
}

TEST_CASE("flat loopback puts the amplitude in the first window tap") {
    const int n = 256, l = 10;
    const auto basis = generate_zc(n);
    const auto assign = allocate_codes(1, 2, l, n)[0];
    const std::vector<int> bits{1, -1, 1};
    const auto ds = extract_user(despread_full(basis, build_message(basis, assign, bits, 0.3)), assign, l);
    for (int b = 0; b < 3; ++b) {
        REQUIRE(ds.vectors[b].size() == static_cast<std::size_t>(l));
        CHECK(std::abs(ds.vectors[b][0] - cdouble(0.3 * bits[b])) < 1e-12);
        for (int t = 1; t < l; ++t) CHECK(std::abs(ds.vectors[b][t]) < 1e-12);
    }
}

TEST_CASE("statistic values for noise-free and empty windows") {
    const int n = 512, l = 8, k = 3;
    const auto basis = generate_zc(n);
    const auto assign = allocate_codes(1, k, l, n)[0];
    const CVec h{cdouble(1.0, 0.0), cdouble(0.0, 1.0)};  // |h|^2 = 2
    const std::vector<int> bits{1, -1, 1, -1};
    const auto y = circular_convolve(build_message(basis, assign, bits, 1.0), h);
    const auto st = decision_stats(extract_user(despread_full(basis, y), assign, l));
    CHECK(st.n_pairs() == 6);
    for (double c : st.c_values) CHECK(c == doctest::Approx(2.0).epsilon(1e-12));

    DespreadSet zero;
    zero.vectors.assign(4, CVec(l));
    const auto z = decision_stats(zero);
    for (double c : z.c_values) CHECK(c == 0.0);
    CHECK_FALSE(detect(z, 1, 0.5).detected);

    DecisionStats one;
    one.c_values = {2.0 + 1e-12};
    one.pairs = {{0, 1}};
    CHECK(detect(one, 1, 2.0).detected);
}

TEST_CASE("bit recovery worked values") {
    const int n = 256, l = 8;
    const auto basis = generate_zc(n);
    const CVec h{cdouble(0.6, -0.2), cdouble(0.1, 0.3)};
    const double hh = std::norm(h[0]) + std::norm(h[1]);

    const auto a1 = allocate_codes(1, 1, l, n)[0];
    const auto y1 = circular_convolve(build_message(basis, a1, std::vector<int>{1, -1}, 2.0), h);
    const auto r1 = recover_bits(extract_user(despread_full(basis, y1), a1, l));
    CHECK(r1.hard_bits == std::vector<int>{-1});
    CHECK(r1.soft_metrics[0] == doctest::Approx(-hh * 4.0).epsilon(1e-12));

    const auto a2 = allocate_codes(1, 2, l, n)[0];
    const auto y2 = circular_convolve(build_message(basis, a2, std::vector<int>{1, 1, -1}, 1.0), h);
    CHECK(recover_bits(extract_user(despread_full(basis, y2), a2, l)).hard_bits == std::vector<int>{1, -1});
}

TEST_CASE("two orthogonally allocated users separate without leakage") {
    const int n = 1024, l = 40;
    const auto basis = generate_zc(n);
    const auto users = allocate_codes(2, 2, l, n);
    RngStream rng(31, {2});
    std::vector<CVec> rx;
    std::vector<CVec> hs;
    const std::vector<std::vector<int>> bits{{1, -1, 1}, {1, 1, -1}};
    for (int u = 0; u < 2; ++u) {
        CVec h(l);
        for (auto& v : h) v = rng.complex_normal(1.0 / l);
        hs.push_back(h);
        rx.push_back(circular_convolve(build_message(basis, users[u], bits[u], 1.0), h));
    }
    const auto y = superpose(rx, NoiseSpec{0.0}, rng);
    const auto yp = despread_full(basis, y);
    for (int u = 0; u < 2; ++u) {
        const auto ds = extract_user(yp, users[u], l);
        for (int b = 0; b < 3; ++b)
            for (int t = 0; t < l; ++t) CHECK(std::abs(ds.vectors[b][t] - double(bits[u][b]) * hs[u][t]) < 1e-9);
    }
}

TEST_CASE("noise power estimate concentration and bias") {
    const int n = 1024;
    int inside = 0;
    for (int t = 0; t < 1000; ++t) {
        RngStream rng(6, {static_cast<std::uint64_t>(t)});
        const auto y = superpose({}, NoiseSpec{1.0}, rng, n);
        const double e = estimate_noise_power(y);
        inside += e >= 0.9 && e <= 1.1;
    }
    CHECK(inside >= 990);

    // USR 15 dB below the noise inflates the estimate by 10 log10(1 + 10^-1.5)
    const auto basis = generate_zc(n);
    const auto a = allocate_codes(1, 1, 40, n)[0];
    const double p = std::pow(10.0, -1.5) * n;
    const auto x = build_message(basis, a, std::vector<int>{1, 1}, code_amplitude(p, 1));
    double bias = 0.0;
    const int reps = 200;
    for (int t = 0; t < reps; ++t) {
        RngStream rng(7, {static_cast<std::uint64_t>(t)});
        const auto y = superpose(std::vector<CVec>{x}, NoiseSpec{1.0}, rng);
        bias += 10.0 * std::log10(estimate_noise_power(y));
    }
    bias /= reps;
    CHECK(bias < 0.15);
    CHECK(bias == doctest::Approx(10.0 * std::log10(1.0 + std::pow(10.0, -1.5))).epsilon(0.1));
}

TEST_CASE("noise terms of the bit metric have zero mean") {
    // fixed channel and bits; the average of b_1 Re(y_0^H y_1) over noise draws is a^2 |h|^2
    const int n = 256, l = 8;
    const auto basis = generate_zc(n);
    const auto a = allocate_codes(1, 1, l, n)[0];
    const CVec h{cdouble(0.5, 0.5), cdouble(-0.2, 0.1), cdouble(0.3, 0.0)};
    double hh = 0.0;
    for (auto v : h) hh += std::norm(v);
    const auto clean = circular_convolve(build_message(basis, a, std::vector<int>{1, -1}, 1.5), h);
    const int reps = 20000;
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < reps; ++t) {
        RngStream rng(8, {static_cast<std::uint64_t>(t)});
        const auto y = superpose(std::vector<CVec>{clean}, NoiseSpec{1.0}, rng);
        const double v = -recover_bits(extract_user(despread_full(basis, y), a, l)).soft_metrics[0];
        sum += v;
        sq += v * v;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 2.25 * hh) < 4.0 * se);
}
