#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smm/rng.hpp"
#include "smm/vec.hpp"

namespace smm {

struct DistributionSpec;

/// Empirical distribution over fixed rows, sampled with replacement.
struct EmpiricalRows {
    std::vector<Vec> rows;
};

/// Gaussian with independent components: mean vector and per-component
/// variances (diagonal covariance).
struct GaussianDiag {
    Vec mean;
    Vec variance;
};

/// Finite mixture of component distributions with given weights.
struct FiniteMixture {
    std::vector<double> weights;
    std::vector<DistributionSpec> components;
};

/// Concatenation of independent blocks: each draw produces one sub-draw per
/// block,  joined into a single row.  Used by application builders that need
/// one draw per component distribution per sample (robust mixtures,
/// per-class attribute draws).
struct ProductBlocks {
    std::vector<DistributionSpec> blocks;
};

/// A sampling distribution for the random vector of a compound problem.
struct DistributionSpec {
    std::variant<EmpiricalRows, GaussianDiag, FiniteMixture, ProductBlocks> kind;

    /// Dimension of one draw.
    int dim() const;

    /// Draw one row, advancing `rng`.
    Vec draw(Rng& rng) const;

    static DistributionSpec empirical(std::vector<Vec> rows);
    static DistributionSpec gaussian(Vec mean, Vec variance);
    static DistributionSpec mixture(std::vector<double> weights,
                                    std::vector<DistributionSpec> components);
    static DistributionSpec product(std::vector<DistributionSpec> blocks);
};

/// An immutable list of sample rows.  Batches emitted by a stream at a later
/// iteration contain every earlier batch as a prefix (union growth).
struct SampleBatch {
    std::vector<Vec> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

/// Single-owner sample stream: a distribution plus a derived sub-stream
/// generator.  Identical (seed, role, distribution) reproduce bit-identical
/// draw sequences.  Distinct roles (xi / eta / residual) must use distinct
/// tags so their streams are mutually independent.
class SampleStream {
public:
    SampleStream(DistributionSpec dist, std::uint64_t seed, std::string role)
        : dist_(std::move(dist)), rng_(Rng::derive(seed, role)), role_(std::move(role)) {}

    /// Append `count` fresh draws to `batch`, preserving existing rows.
    void extend(SampleBatch& batch, std::size_t count) {
        batch.rows.reserve(batch.rows.size() + count);
        for (std::size_t i = 0; i < count; ++i) batch.rows.push_back(dist_.draw(rng_));
        drawn_ += count;
    }

    /// Draw a fresh batch of `count` rows.
    SampleBatch draw_batch(std::size_t count) {
        SampleBatch b;
        extend(b, count);
        return b;
    }

    std::uint64_t drawn() const { return drawn_; }
    const DistributionSpec& distribution() const { return dist_; }

private:
    DistributionSpec dist_;
    Rng rng_;
    std::string role_;
    std::uint64_t drawn_ = 0;
};

}  // namespace smm
