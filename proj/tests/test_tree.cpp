#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <random>
#include <vector>

#include "esglab/tree.hpp"

using namespace esglab;

namespace {

AssetModel flat_model(double mu = 0.05, double sigma = 0.1) {
    return validate_asset_model({"a"}, {mu}, {sigma}, Matrix::identity(1));
}

// independent count: walk the built tree breadth-first over child lists
std::size_t bfs_count(const ScenarioTree& tree) {
    std::vector<std::vector<std::size_t>> children(tree.nodes.size());
    for (std::size_t k = 1; k < tree.nodes.size(); ++k)
        children[*tree.nodes[k].parent].push_back(k);
    std::size_t visited = 0;
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        ++visited;
        for (std::size_t c : children[cur]) queue.push_back(c);
    }
    return visited;
}

}  // namespace

TEST_CASE("node and leaf counts on hand-checked vectors") {
    CHECK(count_nodes(validate_branching({5, 3, 3, 2})) == 156);
    CHECK(count_leaves(validate_branching({5, 3, 3, 2})) == 90);
    CHECK(count_nodes(validate_branching({})) == 1);
    CHECK(count_leaves(validate_branching({})) == 1);
    CHECK(count_nodes(validate_branching({2, 2})) == 7);
    CHECK(count_nodes(validate_branching({3})) == 4);
    CHECK(count_nodes(validate_branching({1, 1, 1})) == 4);
}

TEST_CASE("built tree matches the counting formulas") {
    const auto tree = build_tree(flat_model(), validate_branching({5, 3, 3, 2}), 1.0, 42);
    CHECK(tree.nodes.size() == 156);
    CHECK(tree.arc_count() == 155);

    std::size_t leaves = 0;
    std::vector<std::size_t> child_count(tree.nodes.size(), 0);
    for (std::size_t k = 1; k < tree.nodes.size(); ++k) child_count[*tree.nodes[k].parent]++;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        if (child_count[k] == 0) ++leaves;
    CHECK(leaves == 90);
    CHECK(bfs_count(tree) == 156);
}

TEST_CASE("tree structure invariants hold") {
    const BranchingVector b = validate_branching({3, 2, 4});
    const auto tree = build_tree(flat_model(), b, 0.5, 9);

    CHECK(!tree.nodes[0].parent.has_value());
    CHECK(tree.nodes[0].depth == 0);
    CHECK(tree.nodes[0].prob == 1.0);

    for (std::size_t k = 1; k < tree.nodes.size(); ++k) {
        const TreeNode& node = tree.nodes[k];
        REQUIRE(node.parent.has_value());
        CHECK(*node.parent < k);
        CHECK(node.depth == tree.nodes[*node.parent].depth + 1);
        CHECK(node.prob == 1.0 / static_cast<double>(b.factors[node.depth - 1]));
        CHECK(node.values.size() == 1);
        CHECK(node.values[0] > -1.0);
        // breadth order: depths never decrease
        CHECK(tree.nodes[k - 1].depth <= node.depth);
    }

    // conditional probabilities of each node's children sum to one
    std::vector<double> child_prob(tree.nodes.size(), 0.0);
    std::vector<std::size_t> child_count(tree.nodes.size(), 0);
    for (std::size_t k = 1; k < tree.nodes.size(); ++k) {
        child_prob[*tree.nodes[k].parent] += tree.nodes[k].prob;
        child_count[*tree.nodes[k].parent]++;
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        if (child_count[k] > 0) CHECK(child_prob[k] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("zero volatility pins every arc at the drift") {
    const double dt = 0.25;
    const auto tree = build_tree(flat_model(0.08, 0.0), validate_branching({2, 3}), dt, 1);
    for (std::size_t k = 1; k < tree.nodes.size(); ++k)
        CHECK(tree.nodes[k].values[0] == 0.08 * dt);
}

TEST_CASE("random branching vectors agree with the brute-force count") {
    std::mt19937_64 gen(20240229);
    int done = 0;
    while (done < 20) {
        const std::size_t depth = 1 + gen() % 4;
        std::vector<std::size_t> factors(depth);
        for (auto& f : factors) f = 1 + gen() % 6;
        const BranchingVector b = validate_branching(factors);
        if (count_nodes(b) > 10000) continue;
        const auto tree = build_tree(flat_model(), b, 1.0, gen());
        CHECK(tree.nodes.size() == count_nodes(b));
        CHECK(bfs_count(tree) == count_nodes(b));
        ++done;
    }
}

TEST_CASE("node budget refuses exponential blowups") {
    const std::vector<std::size_t> twenty_one_threes(21, 3);
    CHECK_THROWS_AS(build_tree(flat_model(), validate_branching(twenty_one_threes), 1.0, 1),
                    DomainError);
    CHECK_THROWS_AS(build_tree(flat_model(), validate_branching({100, 100}), 1.0, 1, 5000),
                    DomainError);
    // 1 + 100 + 10000 nodes just fits a budget of 10101
    CHECK_NOTHROW(build_tree(flat_model(), validate_branching({100, 100}), 1.0, 1, 10101));
}

TEST_CASE("tree building is deterministic in the seed") {
    const auto a = build_tree(flat_model(), validate_branching({4, 3}), 1.0, 5);
    const auto b = build_tree(flat_model(), validate_branching({4, 3}), 1.0, 5);
    const auto c = build_tree(flat_model(), validate_branching({4, 3}), 1.0, 6);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t k = 0; k < a.nodes.size(); ++k)
        CHECK(a.nodes[k].values == b.nodes[k].values);
    bool any_diff = false;
    for (std::size_t k = 1; k < a.nodes.size(); ++k)
        if (a.nodes[k].values != c.nodes[k].values) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("tree paths enumerate leaves left to right") {
    const auto tree = build_tree(flat_model(), validate_branching({2, 2}), 1.0, 77);
    const auto [set, probs] = tree_to_paths(tree);
    REQUIRE(set.n_paths == 4);
    REQUIRE(set.n_periods == 2);
    REQUIRE(probs.size() == 4);

    // breadth order: 0 root, 1-2 level one, 3-6 level two
    CHECK(set.at(0, 0, 0) == tree.nodes[1].values[0]);
    CHECK(set.at(0, 1, 0) == tree.nodes[3].values[0]);
    CHECK(set.at(1, 0, 0) == tree.nodes[1].values[0]);
    CHECK(set.at(1, 1, 0) == tree.nodes[4].values[0]);
    CHECK(set.at(2, 0, 0) == tree.nodes[2].values[0]);
    CHECK(set.at(2, 1, 0) == tree.nodes[5].values[0]);
    CHECK(set.at(3, 1, 0) == tree.nodes[6].values[0]);

    double total = 0.0;
    for (double p : probs) {
        CHECK(p == Catch::Approx(0.25).margin(1e-15));
        total += p;
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("path probabilities sum to one for uneven branching") {
    const auto tree = build_tree(flat_model(), validate_branching({5, 3, 3, 2}), 1.0, 3);
    const auto [set, probs] = tree_to_paths(tree);
    CHECK(set.n_paths == 90);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
    CHECK(probs.front() == Catch::Approx(1.0 / 90.0).margin(1e-15));

    const auto bare = build_tree(flat_model(), validate_branching({}), 1.0, 3);
    CHECK_THROWS_AS(tree_to_paths(bare), DomainError);
}
