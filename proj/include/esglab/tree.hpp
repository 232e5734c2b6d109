#pragma once

// Tree-structured projection: a branching vector [b(1), ..., b(T)] fixes
// the layout, node values are drawn with the same one-step rule as the
// linear generator, sibling transition probabilities are uniform.

#include <cstdint>
#include <utility>
#include <vector>

#include "esglab/generation.hpp"
#include "esglab/types.hpp"

namespace esglab {

inline constexpr std::size_t kDefaultMaxTreeNodes = 1'000'000;

// 1 + sum over t of prod_{u<=t} b(u); the empty vector is a bare root.
inline std::size_t count_nodes(const BranchingVector& branching) {
    std::size_t total = 1;
    std::size_t level = 1;
    for (std::size_t b : branching.factors) {
        level *= b;
        total += level;
    }
    return total;
}

inline std::size_t count_leaves(const BranchingVector& branching) {
    std::size_t leaves = 1;
    for (std::size_t b : branching.factors) leaves *= b;
    return leaves;
}

// Breadth-order construction: every node at depth t-1 gets exactly b(t)
// children with conditional probability 1/b(t) and an arc return vector
// drawn from the model's correlated one-step rule. Scenario counts grow
// as the product of the factors, so a node budget guards against
// runaway vectors.
inline ScenarioTree build_tree(const AssetModel& model, const BranchingVector& branching,
                               double dt, std::uint64_t seed,
                               std::size_t max_nodes = kDefaultMaxTreeNodes) {
    if (!(dt > 0.0)) throw DomainError("build_tree: dt must be positive");
    // overflow-safe budget check before allocating anything
    std::size_t total = 1, level = 1;
    for (std::size_t b : branching.factors) {
        if (b < 1) throw DomainError("build_tree: branching factors must be >= 1");
        if (level > max_nodes / b)
            throw DomainError("build_tree: branching vector exceeds the node budget of " +
                              std::to_string(max_nodes));
        level *= b;
        total += level;
        if (total > max_nodes)
            throw DomainError("build_tree: branching vector exceeds the node budget of " +
                              std::to_string(max_nodes));
    }

    const std::size_t n = model.size();
    const Matrix l = cholesky_psd(model.corr);
    const double sqrt_dt = std::sqrt(dt);
    NormalSampler normal(seed);

    ScenarioTree tree;
    tree.branching = branching;
    tree.n_assets = n;
    tree.dt = dt;
    tree.seed = seed;
    tree.nodes.reserve(total);

    TreeNode root;
    root.parent = std::nullopt;
    root.depth = 0;
    root.prob = 1.0;
    root.values.assign(n, 0.0);
    tree.nodes.push_back(std::move(root));

    std::vector<double> raw(n), eps(n), r(n);
    auto slot_returns = [&](const std::vector<double>& e, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = model.mu[i] * dt + model.sigma[i] * sqrt_dt * e[i];
    };

    std::size_t level_begin = 0, level_end = 1;
    for (std::size_t t = 0; t < branching.factors.size(); ++t) {
        const std::size_t b = branching.factors[t];
        const double prob = 1.0 / static_cast<double>(b);
        for (std::size_t parent = level_begin; parent < level_end; ++parent) {
            for (std::size_t c = 0; c < b; ++c) {
                for (std::size_t i = 0; i < n; ++i) raw[i] = normal();
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * raw[j];
                    eps[i] = acc;
                }
                slot_returns(eps, r);
                bool ok = true;
                for (double x : r)
                    if (!(x > -1.0)) ok = false;
                std::uint64_t resamples = 0;
                if (!ok) detail::resample_slot(normal, l, n, slot_returns, r, resamples);

                TreeNode node;
                node.parent = parent;
                node.depth = t + 1;
                node.prob = prob;
                node.values = r;
                tree.nodes.push_back(std::move(node));
            }
        }
        level_begin = level_end;
        level_end = tree.nodes.size();
    }
    return tree;
}

// Root-to-leaf trajectories in depth-first left-to-right order. Path
// probability is the product of conditional probabilities along the way;
// the probabilities sum to 1.
inline std::pair<ScenarioSet, std::vector<double>> tree_to_paths(const ScenarioTree& tree) {
    const std::size_t depth = tree.branching.height();
    const std::size_t n = tree.n_assets;
    if (tree.nodes.empty()) throw DomainError("tree_to_paths: empty tree");
    if (depth == 0) throw DomainError("tree_to_paths: tree has no periods");

    // children are contiguous in breadth order; collect per-node child ranges
    std::vector<std::vector<std::size_t>> children(tree.nodes.size());
    for (std::size_t idx = 1; idx < tree.nodes.size(); ++idx)
        children[*tree.nodes[idx].parent].push_back(idx);

    const std::size_t leaves = count_leaves(tree.branching);
    ScenarioSet set(leaves, depth, n, tree.dt, "tree-paths", tree.seed);
    std::vector<double> probs;
    probs.reserve(leaves);

    std::size_t path = 0;
    // iterative DFS; children pushed in reverse so pop order is left-to-right
    struct Frame {
        std::size_t node;
        double prob;
    };
    std::vector<Frame> dfs;
    dfs.push_back({0, 1.0});
    while (!dfs.empty()) {
        const Frame f = dfs.back();
        dfs.pop_back();
        if (children[f.node].empty()) {
            // walk ancestry to fill the row (depth known, so walk up)
            std::size_t cur = f.node;
            for (std::size_t t = depth; t-- > 0;) {
                for (std::size_t i = 0; i < n; ++i)
                    set.at(path, t, i) = tree.nodes[cur].values[i];
                cur = *tree.nodes[cur].parent;
            }
            probs.push_back(f.prob);
            ++path;
            continue;
        }
        const auto& kids = children[f.node];
        for (std::size_t k = kids.size(); k-- > 0;)
            dfs.push_back({kids[k], f.prob * tree.nodes[kids[k]].prob});
    }
    if (path != leaves) throw DomainError("tree_to_paths: leaf count mismatch");
    return {std::move(set), std::move(probs)};
}

}  // namespace esglab
