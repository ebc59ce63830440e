#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "seqhop/analysis.hpp"
#include "seqhop/energy.hpp"
#include "test_support.hpp"

using namespace seqhop;
using seqhop::testing::central_difference;
using seqhop::testing::random_store;
using seqhop::testing::random_vector;
using seqhop::testing::relative_error;

namespace {

const double kRoot2 = std::sqrt(2.0);

PatternStore single_pattern_store() { return PatternStore::normalized({FrameVector{1, 1}}); }

ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.beta = 0.05 + 1.95 * u(rng);
    p.lambda = u(rng);
    p.lambda_f = 10.0 * u(rng);
    p.mu = u(rng);
    p.sigma = 0.3 + 2.7 * u(rng);
    return p;
}

// Distance from s to the nearest hyperplane where the argmax of <s, s_k> changes.
double distance_to_tie(const FrameVector& s, const PatternStore& store) {
    const std::vector<double> sims = similarities(s, store);
    const std::size_t best = argmax_similarity(sims);
    double dist = INFINITY;
    for (std::size_t k = 0; k < store.size(); ++k) {
        if (k == best) continue;
        const double sep = norm(store[best] - store[k]);
        if (sep == 0.0) continue; // identical patterns never switch the max value
        dist = std::min(dist, (sims[best] - sims[k]) / sep);
    }
    return dist;
}

} // namespace

TEST_CASE("general_energy hand examples") {
    const PatternStore store = single_pattern_store();
    const KernelWeights one = delta_weights(0, 1);
    CHECK(general_energy(store[0], store, one, Functional::Lse, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(general_energy(store[0], store, one, Functional::Exp, 1.0, 0.0) ==
          doctest::Approx(-std::exp(2.0)).epsilon(1e-14));

    const PatternStore twins = PatternStore::normalized({FrameVector{1, 1}, FrameVector{1, 1}});
    const KernelWeights halves{{0.5, 0.5}, 0.0};
    const FrameVector s{0.3, -0.7};
    CHECK(general_energy(s, twins, halves, Functional::Lse, 1.7, 0.0) ==
          doctest::Approx(general_energy(s, store, one, Functional::Lse, 1.7, 0.0)).epsilon(1e-14));
}

TEST_CASE("general_energy rejects all-zero weights and bad shapes") {
    const PatternStore store = single_pattern_store();
    const KernelWeights zero{{0.0}, 0.0};
    CHECK_THROWS_AS(general_energy(store[0], store, zero, Functional::Lse, 1.0, 0.0), DegenerateWeightsError);
    CHECK_THROWS_AS(general_energy(store[0], store, zero, Functional::Exp, 1.0, 0.0), DegenerateWeightsError);
    CHECK_THROWS_AS(general_energy(FrameVector{1, 2, 3}, store, delta_weights(0, 1), Functional::Lse, 1.0, 0.0),
                    DimensionError);
    CHECK_THROWS_AS(general_energy(store[0], store, KernelWeights{{0.5, 0.5}, 0.0}, Functional::Lse, 1.0, 0.0),
                    DimensionError);
}

TEST_CASE("exponential functional overflow is reported, log magnitude stays finite") {
    const PatternStore store = PatternStore::normalized({FrameVector(std::vector<double>(2000, 1.0))});
    const KernelWeights one = delta_weights(0, 1);
    CHECK_THROWS_AS(general_energy(store[0], store, one, Functional::Exp, 1.0, 0.0), NumericsError);
    CHECK(exp_log_magnitude(store[0], store, one, 1.0) == doctest::Approx(2000.0));
    CHECK(std::isfinite(general_energy(store[0], store, one, Functional::Lse, 1.0, 0.0)));
}

TEST_CASE("exp_gradient hand examples") {
    const PatternStore store = PatternStore::normalized({FrameVector{1, 0}});
    const FrameVector orth{0, 3};
    const FrameVector g = exp_gradient(orth, store, delta_weights(0, 1), 1.0, 0.0);
    CHECK(g == FrameVector{-kRoot2, 0});

    const PatternStore three = PatternStore::normalized({FrameVector{1, 0}, FrameVector{0, 1}, FrameVector{1, 1}});
    const FrameVector zero(2);
    const FrameVector g2 = exp_gradient(zero, three, delta_weights(2, 3), 0.7, 2.5);
    CHECK(g2[0] == doctest::Approx(-0.7 * three[2][0]).epsilon(1e-15));
    CHECK(g2[1] == doctest::Approx(-0.7 * three[2][1]).epsilon(1e-15));
}

TEST_CASE("exp_gradient and general_gradient match finite differences") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t d = 1 + rng() % 16;
        const std::size_t n = 1 + rng() % 5;
        const PatternStore store = random_store(rng, n, d);
        const double beta = 0.05 + 1.95 * u(rng);
        const double lambda = u(rng);
        const KernelWeights w = normalized_weights(static_cast<double>(rng() % n), n, 0.3 + 2.0 * u(rng));
        const FrameVector s = random_vector(rng, d);
        for (Functional f : {Functional::Exp, Functional::Lse}) {
            const FrameVector fd = central_difference(
                [&](const FrameVector& x) { return general_energy(x, store, w, f, beta, lambda); }, s, 1e-6);
            const FrameVector an = f == Functional::Exp ? exp_gradient(s, store, w, beta, lambda)
                                                        : general_gradient(s, store, w, f, beta, lambda);
            CHECK(relative_error(an, fd) < 1e-5);
        }
    }
}

TEST_CASE("movie_energy hand examples") {
    const PatternStore store = single_pattern_store();
    ModelParams p;
    p.beta = 1.0;
    p.lambda = 1.0;
    p.mu = 0.0;
    const FrameVector zero(2);
    const EnergyBreakdown e = movie_energy(store[0], 0, store, p, zero);
    CHECK(e.total == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(e.fidelity == 0.0);
    CHECK(e.regularization == doctest::Approx(1.0));
    CHECK(e.lse == doctest::Approx(-2.0));
    CHECK(e.max_term == doctest::Approx(-2.0));

    // Delta weights, orthogonal consecutive frames.
    const PatternStore orth = PatternStore::normalized({FrameVector{0, 1}, FrameVector{1, 0}});
    ModelParams q;
    q.lambda = 0.3;
    q.mu = 0.05;
    q.lambda_f = 7.0;
    const EnergyBreakdown anchor = movie_energy(orth[1], 1, orth, q, orth[0], delta_weights(1, 2));
    const double d = 2.0;
    CHECK(anchor.total == doctest::Approx(q.lambda * d / 2 + 2 * q.mu * d - 2 * d).epsilon(1e-13));
    CHECK(anchor.lse == doctest::Approx(-d).epsilon(1e-15));

    CHECK_THROWS_AS(movie_energy(store[0], 0, store, p, FrameVector{1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(movie_energy(store[0], 1, store, p, zero), ParamError);
}

TEST_CASE("movie_energy breakdown sums to total and fidelity vanishes at the target") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t d = 1 + rng() % 16;
        const std::size_t n = 1 + rng() % 6;
        const PatternStore store = random_store(rng, n, d);
        const ModelParams p = random_params(rng);
        const std::size_t m = rng() % n;
        const FrameVector prev = random_vector(rng, d);
        const EnergyBreakdown s_rand = movie_energy(random_vector(rng, d), m, store, p, prev);
        const double sum = s_rand.regularization + s_rand.fidelity + s_rand.continuity + s_rand.lse + s_rand.max_term;
        CHECK(std::abs(sum - s_rand.total) <= 1e-9 * std::max(1.0, std::abs(s_rand.total)));
        CHECK(movie_energy(store[m], m, store, p, prev).fidelity == 0.0);
    }
}

TEST_CASE("movie_gradient at the origin") {
    const PatternStore store = PatternStore::normalized({FrameVector{1, 0, 2}, FrameVector{0, 1, 1}, FrameVector{3, 1, 0}});
    ModelParams p;
    p.lambda = 0.4;
    p.lambda_f = 2.0;
    p.mu = 0.3;
    p.sigma = 1.0;
    const std::size_t m = 1;
    const FrameVector prev = store[0];
    const FrameVector g = movie_gradient(FrameVector(3), m, store, p, prev);
    const KernelWeights w = normalized_weights(1, 3, 1.0);
    FrameVector expected = -2.0 * p.lambda_f * store[m];
    expected.axpy(-2.0 * p.mu, prev);
    for (std::size_t k = 0; k < 3; ++k) expected.axpy(-w[k], store[k]);
    expected.axpy(-1.0, store[0]);
    CHECK(seqhop::testing::max_abs_diff(g, expected) <= 1e-14);
}

TEST_CASE("movie_gradient matches finite differences away from argmax ties") {
    std::mt19937_64 rng(23);
    int checked = 0;
    for (int rep = 0; rep < 150; ++rep) {
        const std::size_t d = 1 + rng() % 16;
        const std::size_t n = 1 + rng() % 6;
        const PatternStore store = random_store(rng, n, d);
        const ModelParams p = random_params(rng);
        const std::size_t m = rng() % n;
        const FrameVector prev = m == 0 ? FrameVector(d) : store[m - 1];
        const FrameVector s = random_vector(rng, d);
        if (distance_to_tie(s, store) <= 1e-6) continue;
        ++checked;
        const FrameVector fd = central_difference(
            [&](const FrameVector& x) { return movie_energy(x, m, store, p, prev).total; }, s, 1e-6);
        CHECK(relative_error(movie_gradient(s, m, store, p, prev), fd) < 1e-5);
    }
    CHECK(checked > 100);
}

TEST_CASE("fidelity-only gradient is the quadratic bowl") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t d = 2 + rng() % 10;
        const std::size_t n = 1 + rng() % 4;
        const PatternStore store = random_store(rng, n, d);
        ModelParams p = random_params(rng);
        p.lambda = 0.0;
        p.mu = 0.0;
        const std::size_t m = rng() % n;
        const FrameVector prev(d);
        const KernelWeights w = normalized_weights(static_cast<double>(m), n, p.sigma);
        const FrameVector s = random_vector(rng, d);
        // Remove the attention and max contributions by hand.
        FrameVector g = movie_gradient(s, m, store, p, prev, w);
        const SoftmaxProbs probs = softmax_pk(s, store, p.beta, w);
        for (std::size_t k = 0; k < n; ++k) g.axpy(probs.p[k], store[k]);
        g.axpy(1.0, store[argmax_similarity(similarities(s, store))]);
        const FrameVector bowl = 2.0 * p.lambda_f * (s - store[m]);
        CHECK(seqhop::testing::max_abs_diff(g, bowl) <= 1e-12 * std::max(1.0, inf_norm(bowl)));

        FrameVector at_target = movie_gradient(store[m], m, store, p, prev, w);
        const SoftmaxProbs pt = softmax_pk(store[m], store, p.beta, w);
        for (std::size_t k = 0; k < n; ++k) at_target.axpy(pt.p[k], store[k]);
        at_target.axpy(1.0, store[argmax_similarity(similarities(store[m], store))]);
        CHECK(inf_norm(at_target) <= 1e-12);
    }
}

TEST_CASE("softmax_pk examples") {
    const PatternStore store = PatternStore::normalized({FrameVector{1, 0}, FrameVector{0, 1}});
    const FrameVector s{0.9, -2.0};
    const SoftmaxProbs onehot = softmax_pk(s, store, 1.0, delta_weights(1, 2));
    CHECK(onehot.p == std::vector<double>{0.0, 1.0});

    const KernelWeights w{{0.3, 0.7}, 0.0};
    const SoftmaxProbs flat = softmax_pk(s, store, 0.0, w);
    CHECK(flat.p == w.weights);

    for (double beta : {0.5, 1.0, 3.0}) {
        const FrameVector t{std::log(3.0) / (beta * kRoot2), 0.0};
        const SoftmaxProbs probs = softmax_pk(t, store, beta, KernelWeights{{0.5, 0.5}, 0.0});
        CHECK(probs.p[0] == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(probs.p[1] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(probs.argmax_index == 0);
    }
    CHECK_THROWS_AS(softmax_pk(s, store, 1.0, KernelWeights{{0.0, 0.0}, 0.0}), DegenerateWeightsError);
}

TEST_CASE("softmax probabilities sum to one") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = 1 + rng() % 64;
        const std::size_t n = 1 + rng() % 10;
        const PatternStore store = random_store(rng, n, d);
        const KernelWeights w = normalized_weights(static_cast<double>(rng() % n), n, 1.5);
        const SoftmaxProbs probs = softmax_pk(random_vector(rng, d, -5, 5), store, 50.0, w);
        double total = 0.0;
        for (double q : probs.p) {
            CHECK(q >= 0.0);
            total += q;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("argmax ties go to the smallest index") {
    CHECK(argmax_similarity({1.0, 3.0, 3.0, 2.0}) == 1);
    CHECK(argmax_similarity({5.0, 5.0}) == 0);
}

TEST_CASE("LSE term lies between the negative max and the weight-adjusted bound") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t d = 1 + rng() % 32;
        const std::size_t n = 1 + rng() % 8;
        const PatternStore store = random_store(rng, n, d);
        const double beta = 0.1 + 5.0 * u(rng);
        const FrameVector s = random_vector(rng, d, -3, 3);
        const std::vector<double> sims = similarities(s, store);
        const double top = *std::max_element(sims.begin(), sims.end());
        const double tol = 1e-12 * std::max(1.0, std::abs(top));

        const KernelWeights uniform{std::vector<double>(n, 1.0 / static_cast<double>(n)), 0.0};
        const double lse_u = -log_weighted_exp_sum(sims, uniform, beta) / beta;
        CHECK(lse_u >= -top - tol);
        CHECK(lse_u <= -top + std::log(static_cast<double>(n)) / beta + tol);

        const KernelWeights w = normalized_weights(static_cast<double>(rng() % n), n, 0.5 + u(rng));
        const double lse_w = -log_weighted_exp_sum(sims, w, beta) / beta;
        CHECK(lse_w >= -top - tol);
        CHECK(lse_w <= -top - std::log(w[argmax_similarity(sims)]) / beta + tol);
    }
}

TEST_CASE("max-shifted log-sum-exp equals the direct formula") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<double> sims(n);
        for (double& x : sims) x = u(rng);
        const KernelWeights w = normalized_weights(static_cast<double>(rng() % n), n, 1.0);
        const double beta = 0.1 + std::abs(u(rng));
        double direct = 0.0;
        for (std::size_t k = 0; k < n; ++k) direct += w[k] * std::exp(beta * sims[k]);
        CHECK(std::abs(log_weighted_exp_sum(sims, w, beta) - std::log(direct)) <= 1e-12 * std::max(1.0, std::log(direct)));
    }
}

TEST_CASE("delta weights anchor: LSE term at the target is -d") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = 1 + rng() % 100;
        const std::size_t n = 1 + rng() % 6;
        const PatternStore store = random_store(rng, n, d);
        const std::size_t m = rng() % n;
        ModelParams p;
        p.beta = 1.0;
        const EnergyBreakdown e = movie_energy(store[m], m, store, p, FrameVector(d), delta_weights(m, n));
        CHECK(e.lse == doctest::Approx(-static_cast<double>(d)).epsilon(1e-14));
    }
}

TEST_CASE("duplicating a pattern and splitting its weight changes nothing") {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = 1 + rng() % 12;
        const PatternStore base = random_store(rng, 3, d);
        const PatternStore dup = PatternStore::normalized({base[0], base[1], base[2], base[2]});
        const KernelWeights w = normalized_weights(1.0, 3, 1.2);
        const KernelWeights wd{{w[0], w[1], w[2] / 2, w[2] / 2}, 1.0};
        const FrameVector s = random_vector(rng, d);
        for (double beta : {0.3, 1.0, 2.0}) {
            const double e1 = surface_energy(s, base, w, beta, 0.2);
            const double e2 = surface_energy(s, dup, wd, beta, 0.2);
            CHECK(std::abs(e1 - e2) <= 1e-12 * std::max(1.0, std::abs(e1)));
            CHECK(seqhop::testing::max_abs_diff(surface_gradient(s, base, w, beta, 0.2),
                                                surface_gradient(s, dup, wd, beta, 0.2)) <= 1e-12);
        }
    }
}

TEST_CASE("simplified energy is the movie energy without fidelity and continuity") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t d = 1 + rng() % 16;
        const std::size_t n = 1 + rng() % 6;
        const PatternStore store = random_store(rng, n, d);
        ModelParams p = random_params(rng);
        p.lambda_f = 0.0;
        p.mu = 0.0;
        const std::size_t m = rng() % n;
        const FrameVector s = random_vector(rng, d);
        const double simple = simplified_energy(s, static_cast<double>(m), store, p.beta, p.lambda, p.sigma);
        const double movie = movie_energy(s, m, store, p, FrameVector(d)).total;
        CHECK(std::abs(simple - movie) <= 1e-12 * std::max(1.0, std::abs(movie)));
        CHECK(seqhop::testing::max_abs_diff(
                  simplified_gradient(s, static_cast<double>(m), store, p.beta, p.lambda, p.sigma),
                  movie_gradient(s, m, store, p, FrameVector(d))) <= 1e-12);
    }
}

TEST_CASE("simplified energy with one pattern reduces to two linear terms") {
    const PatternStore store = PatternStore::normalized({FrameVector{0.2, 0.9, 0.4}});
    const FrameVector s{1.0, -0.5, 2.0};
    for (double beta : {0.01, 1.0, 100.0}) {
        const double expected = 0.3 / 2 * squared_norm(s) - 2.0 * dot(s, store[0]);
        CHECK(simplified_energy(s, 0.0, store, beta, 0.3, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("morphing instance: the t = 0 surface favours s0 over s5" * doctest::may_fail()) {
    // The six vectors are used verbatim, so the norm-sqrt(2) patterns carry
    // max-term wells twice as deep as the unit ones. At t = 0 the kernel
    // factor only adds log(w)/beta to the LSE term, which cannot close that
    // gap: E([1,0]) is about -1.49 and E([-1,-1]) about -2.75.
    const PatternStore store = morphing_demo_store();
    const double sigma = std::sqrt(0.5);
    const double at_s0 = simplified_energy(FrameVector{1, 0}, 0.0, store, 100.0, 1.0, sigma);
    const double at_s5 = simplified_energy(FrameVector{-1, -1}, 0.0, store, 100.0, 1.0, sigma);
    CHECK(std::isfinite(at_s0));
    CHECK(at_s0 < at_s5);
}

TEST_CASE("continuous energy at unit quadrature step is the end-weighted discrete sum") {
    std::mt19937_64 rng(59);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t d = 1 + rng() % 10;
        const std::size_t n = 3 + rng() % 6;
        const PatternStore store = random_store(rng, n, d);
        const double t = 1.0 + static_cast<double>(rng() % (n - 2));
        const double sigma = 0.8;
        std::vector<double> w(n);
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            w[k] = ((k == 0 || k + 1 == n) ? 0.5 : 1.0) * raw_kernel(t, static_cast<double>(k), sigma);
            total += w[k];
        }
        for (double& x : w) x /= total;
        const FrameVector s = random_vector(rng, d);
        const double expected = surface_energy(s, store, KernelWeights{w, t}, 1.3, 0.2);
        CHECK(std::abs(continuous_energy(s, t, store, 1.3, 0.2, sigma, 1.0) - expected) <= 1e-9);
    }
}

TEST_CASE("continuous energy is continuous in t and its gradient matches finite differences") {
    const PatternStore store = morphing_demo_store();
    const double sigma = std::sqrt(0.5);
    for (double step : {1.0, 0.1}) {
        for (double t : {0.0, 0.37, 1.5, 2.2, 4.999}) {
            for (const FrameVector& s : {FrameVector{0.3, 0.2}, FrameVector{-1.1, 0.4}}) {
                const double e0 = continuous_energy(s, t, store, 100.0, 1.0, sigma, step);
                const double e1 = continuous_energy(s, t + 1e-6, store, 100.0, 1.0, sigma, step);
                CHECK(std::abs(e1 - e0) < 1e-4);
            }
        }
    }
    const FrameVector s{0.31, 0.17};
    const FrameVector fd = central_difference(
        [&](const FrameVector& x) { return continuous_energy(x, 1.3, store, 2.0, 1.0, sigma, 0.25); }, s, 1e-6);
    CHECK(relative_error(continuous_gradient(s, 1.3, store, 2.0, 1.0, sigma, 0.25), fd) < 1e-5);
}
