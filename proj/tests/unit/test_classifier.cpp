#include <doctest.h>

#include <cmath>
#include <random>

#include "coupdate/classifier.hpp"
#include "coupdate/serialization.hpp"

using namespace coupdate;

namespace {

struct Toy {
    std::vector<Features> x;
    std::vector<ClassId> y;
};

Toy blobs(const std::vector<Features>& means, int per_class, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    Toy t;
    for (int i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < means.size(); ++c) {
            Features f = means[c];
            for (double& v : f) v += n(rng);
            t.x.push_back(f);
            t.y.push_back(static_cast<ClassId>(c));
        }
    }
    return t;
}

double accuracy(const LinearModel& m, const Toy& t) {
    int ok = 0;
    for (std::size_t i = 0; i < t.x.size(); ++i) ok += m.predict(t.x[i]) == t.y[i];
    return static_cast<double>(ok) / static_cast<double>(t.x.size());
}

}  // namespace

TEST_CASE("separable two-class toy is learned perfectly") {
    Toy t = blobs({{-5.0, 0.0}, {5.0, 0.0}}, 20, 0.1, 1);
    LinearModel m = LinearModel::fit(t.x, t.y, 2, Hyperparams{});
    CHECK(accuracy(m, t) == 1.0);
}

TEST_CASE("single sample per class is predicted as its own class") {
    std::vector<Features> x{{1.0, 2.0, 0.0}, {0.0, -1.0, 3.0}};
    std::vector<ClassId> y{0, 1};
    LinearModel m = LinearModel::fit(x, y, 2, Hyperparams{});
    CHECK(m.predict(x[0]) == 0);
    CHECK(m.predict(x[1]) == 1);
}

TEST_CASE("far inputs follow the nearest prototype") {
    std::vector<Features> protos;
    for (int c = 0; c < 5; ++c) {
        const double ang = 2.0 * M_PI * c / 5.0;
        protos.push_back({3.0 * std::cos(ang), 3.0 * std::sin(ang)});
    }
    Toy t = blobs(protos, 15, 0.2, 2);
    LinearModel m = LinearModel::fit(t.x, t.y, 5, Hyperparams{});
    CHECK(accuracy(m, t) == 1.0);
    for (int c = 0; c < 5; ++c) {
        Features far{protos[c][0] * 10.0, protos[c][1] * 10.0};
        int nearest = 0;
        double best = 1e300;
        for (int k = 0; k < 5; ++k) {
            const double dx = far[0] - protos[k][0], dy = far[1] - protos[k][1];
            if (dx * dx + dy * dy < best) {
                best = dx * dx + dy * dy;
                nearest = k;
            }
        }
        CHECK(nearest == c);
        CHECK(m.predict(far) == nearest);
    }
}

TEST_CASE("probabilities are normalized for random inputs") {
    Toy t = blobs({{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}, 10, 0.3, 3);
    for (Loss loss : {Loss::Logistic, Loss::Hinge}) {
        Hyperparams hp;
        hp.loss = loss;
        LinearModel m = LinearModel::fit(t.x, t.y, 3, hp);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n(0.0, 10.0);
        for (int i = 0; i < 1000; ++i) {
            Features x{n(rng), n(rng), n(rng)};
            auto p = m.predict_proba(x);
            double sum = 0.0;
            for (double v : p.probs) sum += v;
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            CHECK(p.doc >= 0.0);
            CHECK(p.doc <= 1.0);
        }
    }
}

TEST_CASE("zero model gives uniform scores and zero certainty") {
    auto m = LinearModel::from_parameters(3, 2, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0),
                                          Hyperparams{}, 0);
    auto p = m.predict_proba(std::vector<double>{4.0, -1.0});
    CHECK(p.doc == 0.0);
    CHECK(p.top1 == 0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Features> x;
    std::vector<ClassId> y{0, 1, 2, 1, 0};
    for (int i = 0; i < 5; ++i) x.push_back({n(rng), n(rng), n(rng), n(rng)});
    std::vector<double> w(12), b(3);
    for (double& v : w) v = n(rng);
    for (double& v : b) v = n(rng);
    Hyperparams hp;
    hp.alpha = 0.05;
    LinearModel m = LinearModel::from_parameters(3, 4, w, b, hp, 0);

    const Gradient g = training_gradient(m, x, y);
    const double h = 1e-5;
    auto check = [&](std::span<double> params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i];
            params[i] = keep + h;
            const double up = training_loss(m, x, y);
            params[i] = keep - h;
            const double down = training_loss(m, x, y);
            params[i] = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double rel = std::abs(numeric - analytic[i]) / std::max(1e-8, std::abs(numeric) + std::abs(analytic[i]));
            CHECK(rel <= 1e-4);
        }
    };
    check(m.weights(), g.weights);
    check(m.bias(), g.bias);
}

TEST_CASE("repeated partial_fit on one sample reinforces its class") {
    Toy t = blobs({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}}, 10, 0.8, 5);
    LinearModel m = LinearModel::fit(t.x, t.y, 3, Hyperparams{});
    const Features x{0.3, 0.35};
    const std::vector<Features> batch{x};
    for (ClassId c : {0, 1, 2}) {
        LinearModel mc = m;
        const std::vector<ClassId> label{c};
        double prev = mc.predict_proba(x).probs[static_cast<std::size_t>(c)];
        for (int k = 0; k < 10; ++k) {
            mc.partial_fit(batch, label);
            const double now = mc.predict_proba(x).probs[static_cast<std::size_t>(c)];
            CHECK(now >= prev);
            prev = now;
        }
        CHECK(mc.predict(x) == c);
    }
}

TEST_CASE("partial_fit edge cases") {
    Toy t = blobs({{1.0, 0.0}, {0.0, 1.0}}, 5, 0.1, 6);
    LinearModel m = LinearModel::fit(t.x, t.y, 2, Hyperparams{});
    const LinearModel before = m;
    m.partial_fit({}, {});
    CHECK(m == before);

    const std::vector<Features> one{{0.0, 0.0}};
    CHECK_THROWS_AS(m.partial_fit(one, std::vector<ClassId>{2}), ValidationError);
    CHECK_THROWS_AS(m.partial_fit(std::vector<Features>{{0.0, 0.0, 0.0}}, std::vector<ClassId>{0}),
                    ValidationError);
    LinearModel empty;
    CHECK_THROWS_AS(empty.partial_fit(one, std::vector<ClassId>{0}), ValidationError);
    CHECK_THROWS_AS(m.predict_proba(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("fit preconditions") {
    const Hyperparams hp;
    CHECK_THROWS_AS(LinearModel::fit(std::vector<Features>{{1.0}, {1.0, 2.0}}, std::vector<ClassId>{0, 1}, 2, hp),
                    ValidationError);
    CHECK_THROWS_AS(LinearModel::fit(std::vector<Features>{{1.0}, {2.0}}, std::vector<ClassId>{1, 1}, 2, hp),
                    ValidationError);
    CHECK_THROWS_AS(LinearModel::fit(std::vector<Features>{{1.0}, {NAN}}, std::vector<ClassId>{0, 1}, 2, hp),
                    ValidationError);
    CHECK_THROWS_AS(LinearModel::fit(std::vector<Features>{{1.0}}, std::vector<ClassId>{0, 1}, 2, hp),
                    ValidationError);
    Hyperparams bad;
    bad.eta0 = 0.0;
    CHECK_THROWS_AS(LinearModel::fit(std::vector<Features>{{1.0}, {2.0}}, std::vector<ClassId>{0, 1}, 2, bad),
                    ValidationError);
}

TEST_CASE("training is deterministic and resumable") {
    Toy t = blobs({{1.0, 0.0, 0.5}, {0.0, 1.0, 0.5}, {0.5, 0.5, 1.0}}, 8, 0.5, 7);
    Hyperparams hp;
    hp.seed = 42;
    LinearModel a = LinearModel::fit(t.x, t.y, 3, hp);
    LinearModel b = LinearModel::fit(t.x, t.y, 3, hp);
    CHECK(a == b);
    a.partial_fit(t.x, t.y);
    b.partial_fit(t.x, t.y);
    CHECK(a == b);
    CHECK(a.steps() == static_cast<std::uint64_t>(t.x.size()) * (50 + 5));

    hp.seed = 43;
    CHECK_FALSE(LinearModel::fit(t.x, t.y, 3, hp) == LinearModel::fit(t.x, t.y, 3, Hyperparams{}));
}

TEST_CASE("model json round trip is exact") {
    Toy t = blobs({{1.0, 0.0}, {0.0, 1.0}}, 6, 0.4, 9);
    Hyperparams hp;
    hp.loss = Loss::Hinge;
    hp.seed = 17;
    LinearModel m = LinearModel::fit(t.x, t.y, 2, hp);
    Json j = m;
    LinearModel back = Json::parse(j.dump()).get<LinearModel>();
    CHECK(back == m);
    for (const auto& x : t.x) CHECK(back.predict_proba(x) == m.predict_proba(x));

    Json unfitted = LinearModel{};
    CHECK(Json::parse(unfitted.dump()).get<LinearModel>() == LinearModel{});
}
