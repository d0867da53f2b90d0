#pragma once

// Exhaustive optimum for tiny inputs. Uses nothing but pairwise distances, so it can
// check the MST / cut-weight route independently.

#include "core.hpp"

#include <cstdint>
#include <limits>

namespace ultrafit {

namespace detail {

class TopologyEnumerator {
public:
    explicit TopologyEnumerator(const PointSet& points) : n_(points.size()), w_(n_ * n_)
    {
        for (index_t i = 0; i < n_; ++i) {
            for (index_t j = 0; j < n_; ++j) {
                w_[i * n_ + j] = i == j ? 0.0 : distance(points, i, j);
            }
        }
        const std::size_t nodes = 2 * n_ - 1;
        left_.assign(nodes, none);
        right_.assign(nodes, none);
        parent_.assign(nodes, none);
    }

    double run()
    {
        root_ = 0;
        next_ = n_;
        insert_leaf(1);
        return best_;
    }

private:
    static constexpr index_t none = std::numeric_limits<index_t>::max();

    void insert_leaf(index_t leaf)
    {
        if (leaf == n_) {
            evaluate();
            return;
        }
        const index_t existing = next_;
        // every current node (leaves 0..leaf-1 and internal n..next_-1) is an insertion point
        std::vector<index_t> sites;
        for (index_t x = 0; x < leaf; ++x) {
            sites.push_back(x);
        }
        for (index_t x = n_; x < existing; ++x) {
            sites.push_back(x);
        }
        for (index_t x : sites) {
            const index_t p = next_++;
            const index_t old_parent = parent_[x];
            const index_t old_root = root_;
            left_[p] = x;
            right_[p] = leaf;
            parent_[p] = old_parent;
            parent_[x] = p;
            parent_[leaf] = p;
            if (old_parent == none) {
                root_ = p;
            } else if (left_[old_parent] == x) {
                left_[old_parent] = p;
            } else {
                right_[old_parent] = p;
            }

            insert_leaf(leaf + 1);

            if (old_parent == none) {
                root_ = old_root;
            } else if (left_[old_parent] == p) {
                left_[old_parent] = x;
            } else {
                right_[old_parent] = x;
            }
            parent_[x] = old_parent;
            parent_[leaf] = none;
            left_[p] = right_[p] = parent_[p] = none;
            --next_;
        }
    }

    // returns (leaf mask, minimal feasible height) of the subtree at node
    std::pair<std::uint32_t, double> visit(index_t node, double& alpha) const
    {
        if (node < n_) {
            return {std::uint32_t{1} << node, 0.0};
        }
        const auto [lmask, lh] = visit(left_[node], alpha);
        const auto [rmask, rh] = visit(right_[node], alpha);
        double max_w = 0.0;
        double min_w = std::numeric_limits<double>::infinity();
        for (index_t x = 0; x < n_; ++x) {
            if (!(lmask >> x & 1u)) {
                continue;
            }
            for (index_t y = 0; y < n_; ++y) {
                if (rmask >> y & 1u) {
                    max_w = std::max(max_w, w_[x * n_ + y]);
                    min_w = std::min(min_w, w_[x * n_ + y]);
                }
            }
        }
        const double h = std::max({max_w, lh, rh});
        alpha = std::max(alpha, h / min_w);
        return {lmask | rmask, h};
    }

    void evaluate()
    {
        double alpha = 1.0;
        visit(root_, alpha);
        best_ = std::min(best_, alpha);
    }

    std::size_t n_;
    std::vector<double> w_;
    std::vector<index_t> left_, right_, parent_;
    index_t root_ = 0;
    index_t next_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

} // namespace detail

/// Minimum over all rooted binary topologies of the best achievable max distortion,
/// with heights set to the smallest values that dominate every distance. n <= 7.
inline double brute_force_opt_alpha(const PointSet& points)
{
    const std::size_t n = points.size();
    if (n > 7) {
        throw std::invalid_argument("brute_force_opt_alpha: n = " + std::to_string(n)
                                    + " exceeds the enumeration limit of 7");
    }
    if (n < 2) {
        return 1.0;
    }
    return detail::TopologyEnumerator(points).run();
}

} // namespace ultrafit
