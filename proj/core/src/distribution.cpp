#include "smm/distribution.hpp"

#include <cmath>

namespace smm {

namespace {

struct DimVisitor {
    int operator()(const EmpiricalRows& e) const {
        return e.rows.empty() ? 0 : static_cast<int>(e.rows.front().size());
    }
    int operator()(const GaussianDiag& g) const { return static_cast<int>(g.mean.size()); }
    int operator()(const FiniteMixture& m) const {
        return m.components.empty() ? 0 : m.components.front().dim();
    }
    int operator()(const ProductBlocks& p) const {
        int d = 0;
        for (const auto& b : p.blocks) d += b.dim();
        return d;
    }
};

struct DrawVisitor {
    Rng& rng;

    Vec operator()(const EmpiricalRows& e) const {
        if (e.rows.empty()) throw std::invalid_argument("empirical distribution has no rows");
        return e.rows[rng.next_index(e.rows.size())];
    }

    Vec operator()(const GaussianDiag& g) const {
        Vec row(g.mean.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            row[i] = g.mean[i] + std::sqrt(g.variance[i]) * rng.next_gauss();
        return row;
    }

    Vec operator()(const FiniteMixture& m) const {
        if (m.components.empty()) throw std::invalid_argument("mixture has no components");
        const double u = rng.next_unit();
        double cum = 0.0;
        std::size_t pick = m.components.size() - 1;
        for (std::size_t k = 0; k < m.weights.size(); ++k) {
            cum += m.weights[k];
            if (u < cum) {
                pick = k;
                break;
            }
        }
        return m.components[pick].draw(rng);
    }

    Vec operator()(const ProductBlocks& p) const {
        Vec row;
        for (const auto& b : p.blocks) {
            Vec sub = b.draw(rng);
            row.insert(row.end(), sub.begin(), sub.end());
        }
        return row;
    }
};

void check_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw std::invalid_argument("empirical distribution needs at least one row");
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            throw std::invalid_argument("empirical rows have inconsistent dimensions");
}

}  // namespace

int DistributionSpec::dim() const { return std::visit(DimVisitor{}, kind); }

Vec DistributionSpec::draw(Rng& rng) const { return std::visit(DrawVisitor{rng}, kind); }

DistributionSpec DistributionSpec::empirical(std::vector<Vec> rows) {
    check_rows(rows);
    return DistributionSpec{EmpiricalRows{std::move(rows)}};
}

DistributionSpec DistributionSpec::gaussian(Vec mean, Vec variance) {
    if (mean.size() != variance.size())
        throw std::invalid_argument("gaussian mean/variance dimension mismatch");
    for (double v : variance)
        if (v < 0.0) throw std::invalid_argument("gaussian variance must be nonnegative");
    return DistributionSpec{GaussianDiag{std::move(mean), std::move(variance)}};
}

DistributionSpec DistributionSpec::mixture(std::vector<double> weights,
                                           std::vector<DistributionSpec> components) {
    if (weights.size() != components.size() || components.empty())
        throw std::invalid_argument("mixture needs matching, nonempty weights and components");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("mixture weights must sum to 1");
    const int d = components.front().dim();
    for (const auto& c : components)
        if (c.dim() != d) throw std::invalid_argument("mixture components have mixed dimensions");
    return DistributionSpec{FiniteMixture{std::move(weights), std::move(components)}};
}

DistributionSpec DistributionSpec::product(std::vector<DistributionSpec> blocks) {
    if (blocks.empty()) throw std::invalid_argument("product distribution needs blocks");
    return DistributionSpec{ProductBlocks{std::move(blocks)}};
}

}  // namespace smm
