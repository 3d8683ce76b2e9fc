#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "coupdate/bow.hpp"

using namespace coupdate;

namespace {

std::vector<Features> gaussian(std::mt19937_64& rng, std::size_t n, std::size_t d, double sigma,
                               const Features& mean = {}) {
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<Features> out(n, Features(d));
    for (auto& x : out) {
        for (std::size_t j = 0; j < d; ++j) x[j] = (mean.empty() ? 0.0 : mean[j]) + g(rng);
    }
    return out;
}

std::size_t scan_nearest(const Features& x, const Codebook& book) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < book.size(); ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) d += (x[j] - book.centroids()[c][j]) * (x[j] - book.centroids()[c][j]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("K=1 centroid is the mean") {
    std::mt19937_64 rng(1);
    const auto xs = gaussian(rng, 500, 5, 2.0);
    Features mean(5, 0.0);
    for (const auto& x : xs) {
        for (std::size_t j = 0; j < 5; ++j) mean[j] += x[j] / 500.0;
    }
    const Codebook book = fit_codebook(xs, 1, 9);
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(book.centroids()[0][j] - mean[j]) <= 1e-9);
}

TEST_CASE("K equal to the distinct descriptors covers them exactly") {
    std::vector<Features> xs{{0, 0}, {5, 5}, {-3, 2}, {10, -1}};
    std::vector<Features> dup = xs;
    dup.insert(dup.end(), xs.begin(), xs.end());
    KMeansTrace trace;
    const Codebook book = fit_codebook(dup, 4, 2, {}, &trace);
    CHECK(trace.objective.back() == 0.0);
    for (const auto& x : xs) CHECK(book.centroids()[quantize(x, book)] == x);
}

TEST_CASE("well separated blobs are recovered") {
    std::mt19937_64 rng(3);
    const std::vector<Features> means{{0, 0, 0}, {10, 0, 0}, {0, 10, 10}};
    std::vector<Features> xs;
    for (const auto& m : means) {
        auto blob = gaussian(rng, 300, 3, 0.5, m);
        xs.insert(xs.end(), blob.begin(), blob.end());
    }
    // blob means computed directly from the samples
    std::vector<Features> sample_means;
    for (int b = 0; b < 3; ++b) {
        Features m(3, 0.0);
        for (int i = 0; i < 300; ++i) {
            for (std::size_t j = 0; j < 3; ++j) m[j] += xs[static_cast<std::size_t>(b * 300 + i)][j] / 300.0;
        }
        sample_means.push_back(m);
    }
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const Codebook book = fit_codebook(xs, 3, seed);
        for (const auto& m : sample_means) {
            double best = 1e300;
            for (const auto& c : book.centroids()) {
                double d = 0.0;
                for (std::size_t j = 0; j < 3; ++j) d += (c[j] - m[j]) * (c[j] - m[j]);
                best = std::min(best, std::sqrt(d));
            }
            CHECK(best <= 0.1);
        }
    }
}

TEST_CASE("k-means objective never increases") {
    std::mt19937_64 rng(4);
    const auto xs = gaussian(rng, 2000, 4, 1.0);
    for (std::size_t k : {2u, 7u, 30u}) {
        KMeansTrace trace;
        fit_codebook(xs, k, 5, {}, &trace);
        REQUIRE(trace.objective.size() >= 2);
        for (std::size_t i = 1; i < trace.objective.size(); ++i) {
            CHECK(trace.objective[i] <= trace.objective[i - 1] * (1.0 + 1e-12));
        }
        CHECK(trace.iterations <= 100);
    }
}

TEST_CASE("empty clusters are re-seeded and K stays fixed") {
    // many copies of few points: several clusters end up empty along the way
    std::vector<Features> xs;
    for (int r = 0; r < 50; ++r) {
        xs.push_back({0.0});
        xs.push_back({1.0});
        xs.push_back({100.0});
    }
    xs.push_back({50.0});
    const Codebook book = fit_codebook(xs, 4, 6);
    CHECK(book.size() == 4);
    for (const auto& c : book.centroids()) CHECK(std::isfinite(c[0]));
}

TEST_CASE("fitting is deterministic and validates input") {
    std::mt19937_64 rng(7);
    const auto xs = gaussian(rng, 200, 3, 1.0);
    CHECK(fit_codebook(xs, 5, 11) == fit_codebook(xs, 5, 11));
    CHECK(fit_codebook(xs, 5, 11).seed() == 11);
    CHECK_THROWS_AS(fit_codebook(xs, 0, 1), ValidationError);
    CHECK_THROWS_AS(fit_codebook(std::vector<Features>{{1.0}}, 2, 1), ValidationError);
    CHECK_THROWS_AS(fit_codebook(std::vector<Features>{{1.0}, {1.0, 2.0}}, 1, 1), ValidationError);
}

TEST_CASE("quantize matches an exhaustive scan") {
    std::mt19937_64 rng(8);
    const Codebook book(gaussian(rng, 50, 6, 1.0), 0);
    for (const auto& x : gaussian(rng, 10000, 6, 1.5)) REQUIRE(quantize(x, book) == scan_nearest(x, book));

    CHECK(quantize(book.centroids()[3], book) == 3);
    const Codebook two({{0.0, 0.0}, {2.0, 0.0}}, 0);
    CHECK(quantize(std::vector<double>{1.0, 0.0}, two) == 0);
    CHECK_THROWS_AS(quantize(std::vector<double>{1.0}, two), ValidationError);
}

TEST_CASE("encoding") {
    const Codebook book({{0.0}, {10.0}, {20.0}, {30.0}}, 0);
    const Features h = encode(std::vector<Features>{{19.0}, {21.0}, {20.0}}, book);
    CHECK(h == Features{0.0, 0.0, 1.0, 0.0});

    std::vector<Features> mix;
    for (int i = 0; i < 5; ++i) {
        mix.push_back({0.5});
        mix.push_back({9.5});
    }
    CHECK(encode(mix, book) == Features{0.5, 0.5, 0.0, 0.0});
    CHECK_THROWS_AS(encode({}, book), ValidationError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5.0, 35.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<Features> xs(static_cast<std::size_t>(1 + t));
        for (auto& x : xs) x = {u(rng)};
        double sum = 0.0;
        for (double v : encode(xs, book)) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("multichannel encoding concatenates blocks") {
    std::mt19937_64 rng(10);
    std::vector<Codebook> books;
    std::vector<std::vector<Features>> sets;
    for (int s = 0; s < 4; ++s) {
        books.emplace_back(gaussian(rng, 500, 3, 1.0), 0);
        sets.push_back(gaussian(rng, 40, 3, 1.0));
    }
    std::vector<DescriptorSet> in;
    for (int s = 0; s < 4; ++s) in.push_back({sets[s], &books[s]});
    const Features all = encode_multichannel(in);
    CHECK(all.size() == 2000);

    const Features one = encode_multichannel(std::vector<DescriptorSet>{in[2]});
    CHECK(one == encode(sets[2], books[2]));

    std::vector<DescriptorSet> swapped{in[1], in[0], in[2], in[3]};
    const Features sw = encode_multichannel(swapped);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(sw[i] == all[500 + i]);
        CHECK(sw[500 + i] == all[i]);
    }
    CHECK_THROWS_AS(encode_multichannel(std::vector<DescriptorSet>{{sets[0], nullptr}}), ValidationError);
}

TEST_CASE("codebook file round trip is exact") {
    std::mt19937_64 rng(11);
    const Codebook book(gaussian(rng, 7, 3, 1e-3), 123456789);
    std::stringstream ss;
    write_codebook(ss, book);
    CHECK(read_codebook(ss) == book);

    std::istringstream bad("2 2 0\n1 2\n3\n");
    CHECK_THROWS_AS(read_codebook(bad), ValidationError);
    std::istringstream junk("1 1 0\nabc\n");
    CHECK_THROWS_AS(read_codebook(junk), ValidationError);
    CHECK_THROWS_AS(load_codebook("/nonexistent/book.txt"), ValidationError);
}
