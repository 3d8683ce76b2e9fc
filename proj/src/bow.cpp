#include "coupdate/bow.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "coupdate/csv.hpp"

namespace coupdate {
namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest(std::span<const double> x, const std::vector<Features>& centroids, double& dist) {
    std::size_t best = 0;
    dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(x, centroids[c]);
        if (d < dist) {
            dist = d;
            best = c;
        }
    }
    return best;
}

std::vector<Features> kmeans_plus_plus(std::span<const Features> xs, std::size_t k, std::mt19937_64& rng) {
    std::vector<Features> centers;
    centers.reserve(k);
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    centers.push_back(xs[pick(rng)]);

    std::vector<double> d2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d2[i] = squared_distance(xs[i], centers.back());

    while (centers.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t chosen = pick(rng);
        if (total > 0.0) {
            const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            double cum = 0.0;
            chosen = xs.size();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (d2[i] <= 0.0) continue;
                cum += d2[i];
                chosen = i;
                if (r < cum) break;
            }
        }
        centers.push_back(xs[chosen]);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(xs[i], centers.back()));
        }
    }
    return centers;
}

}  // namespace

Codebook::Codebook(std::vector<Features> centroids, std::uint64_t seed)
    : centroids_(std::move(centroids)), seed_(seed) {
    if (centroids_.empty()) throw ValidationError("a codebook needs at least one centroid");
    for (const auto& c : centroids_) {
        if (c.size() != centroids_.front().size() || c.empty()) {
            throw ValidationError("codebook centroids must share a non-zero dimension");
        }
        if (!all_finite(c)) throw ValidationError("non-finite codebook centroid");
    }
}

Codebook fit_codebook(std::span<const Features> descriptors, std::size_t k, std::uint64_t seed,
                      const KMeansOptions& options, KMeansTrace* trace) {
    if (k < 1) throw ValidationError("K must be at least 1");
    if (descriptors.size() < k) throw ValidationError("fewer descriptors than codewords");
    const std::size_t d = descriptors.front().size();
    for (const auto& x : descriptors) {
        if (x.size() != d || d == 0) throw ValidationError("descriptor dimension mismatch");
        if (!all_finite(x)) throw ValidationError("non-finite descriptor");
    }

    std::mt19937_64 rng(seed);
    std::vector<Features> centroids = kmeans_plus_plus(descriptors, k, rng);
    KMeansTrace local;
    KMeansTrace& t = trace ? *trace : local;
    t = KMeansTrace{};

    std::vector<std::size_t> assignment(descriptors.size());
    std::vector<double> dist(descriptors.size());
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        double objective = 0.0;
        for (std::size_t i = 0; i < descriptors.size(); ++i) {
            assignment[i] = nearest(descriptors[i], centroids, dist[i]);
            objective += dist[i];
        }
        t.objective.push_back(objective);
        t.iterations = iter + 1;

        std::vector<Features> sums(k, Features(d, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < descriptors.size(); ++i) {
            auto& s = sums[assignment[i]];
            for (std::size_t j = 0; j < d; ++j) s[j] += descriptors[i][j];
            ++counts[assignment[i]];
        }
        std::vector<bool> taken(descriptors.size(), false);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            Features next(d);
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j) next[j] = sums[c][j] / static_cast<double>(counts[c]);
            } else {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < descriptors.size(); ++i) {
                    if (!taken[i] && dist[i] > far_d) {
                        far_d = dist[i];
                        far = i;
                    }
                }
                taken[far] = true;
                next = descriptors[far];
            }
            shift = std::max(shift, std::sqrt(squared_distance(next, centroids[c])));
            centroids[c] = std::move(next);
        }
        if (shift < options.tolerance) {
            t.converged = true;
            break;
        }
    }
    double final_objective = 0.0;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        double di = 0.0;
        nearest(descriptors[i], centroids, di);
        final_objective += di;
    }
    t.objective.push_back(final_objective);
    return Codebook(std::move(centroids), seed);
}

std::size_t quantize(std::span<const double> descriptor, const Codebook& codebook) {
    if (descriptor.size() != codebook.dim()) throw ValidationError("descriptor dimension mismatch");
    double dist = 0.0;
    return nearest(descriptor, codebook.centroids(), dist);
}

Features encode(std::span<const Features> descriptors, const Codebook& codebook) {
    if (descriptors.empty()) throw ValidationError("cannot encode an empty descriptor list");
    Features hist(codebook.size(), 0.0);
    for (const auto& x : descriptors) hist[quantize(x, codebook)] += 1.0;
    const double n = static_cast<double>(descriptors.size());
    for (double& h : hist) h /= n;
    return hist;
}

Features encode_multichannel(std::span<const DescriptorSet> sets) {
    Features out;
    for (const auto& s : sets) {
        if (s.codebook == nullptr) throw ValidationError("descriptor set without a codebook");
        const Features h = encode(s.descriptors, *s.codebook);
        out.insert(out.end(), h.begin(), h.end());
    }
    return out;
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
    out << codebook.size() << ' ' << codebook.dim() << ' ' << codebook.seed() << '\n';
    for (const auto& c : codebook.centroids()) {
        for (std::size_t j = 0; j < c.size(); ++j) out << (j ? " " : "") << format_number(c[j]);
        out << '\n';
    }
}

Codebook read_codebook(std::istream& in) {
    std::size_t k = 0, d = 0;
    std::uint64_t seed = 0;
    if (!(in >> k >> d >> seed) || k == 0 || d == 0) throw ValidationError("malformed codebook header");
    std::vector<Features> centroids(k, Features(d));
    std::string token;
    for (auto& c : centroids) {
        for (double& v : c) {
            if (!(in >> token)) throw ValidationError("truncated codebook");
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
            if (ec != std::errc{} || ptr != token.data() + token.size()) {
                throw ValidationError("malformed codebook value '" + token + "'");
            }
        }
    }
    return Codebook(std::move(centroids), seed);
}

void save_codebook(const std::filesystem::path& path, const Codebook& codebook) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_codebook(out, codebook);
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open codebook '" + path.string() + "'");
    return read_codebook(in);
}

}  // namespace coupdate
