#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "coupdate/types.hpp"

namespace coupdate {

// K centroids of a bag-of-words vocabulary.
class Codebook {
public:
    Codebook() = default;
    Codebook(std::vector<Features> centroids, std::uint64_t seed);

    std::size_t size() const { return centroids_.size(); }
    std::size_t dim() const { return centroids_.empty() ? 0 : centroids_.front().size(); }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Features>& centroids() const { return centroids_; }

    friend bool operator==(const Codebook&, const Codebook&) = default;

private:
    std::vector<Features> centroids_;
    std::uint64_t seed_ = 0;
};

struct KMeansOptions {
    int max_iterations = 100;
    // Stop once no centroid moves farther than this.
    double tolerance = 1e-6;
};

struct KMeansTrace {
    // Sum of squared distances to the nearest centroid, one entry per
    // assignment step; non-increasing.
    std::vector<double> objective;
    int iterations = 0;
    bool converged = false;
};

// Lloyd's k-means with k-means++ seeding. A cluster left empty is re-seeded
// at the descriptor farthest from its assigned centroid, so K stays fixed.
Codebook fit_codebook(std::span<const Features> descriptors, std::size_t k, std::uint64_t seed,
                      const KMeansOptions& options = {}, KMeansTrace* trace = nullptr);

// Nearest centroid by Euclidean distance, ties to the lower index.
std::size_t quantize(std::span<const double> descriptor, const Codebook& codebook);

// L1-normalised K-bin histogram of quantization counts.
Features encode(std::span<const Features> descriptors, const Codebook& codebook);

struct DescriptorSet {
    std::span<const Features> descriptors;
    const Codebook* codebook = nullptr;
};

// Concatenation of encode() over the sets, in order.
Features encode_multichannel(std::span<const DescriptorSet> sets);

// Text format: "K d seed" on the first line, then one centroid per line.
void write_codebook(std::ostream& out, const Codebook& codebook);
Codebook read_codebook(std::istream& in);
void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace coupdate
