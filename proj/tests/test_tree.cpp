#include <doctest.h>

#include <map>
#include <sstream>

#include "fixture.hpp"
#include "ncu/errors.hpp"
#include "ncu/tree.hpp"

using namespace ncu;

TEST_SUITE("tree") {

TEST_CASE("binomial one-period fixture loads with derived structure") {
    auto t = ScenarioTree::load(fixture("tree_binomial_t1.json"));
    CHECK(t.dim() == 1);
    CHECK(t.horizon() == 1);
    CHECK(t.node_count() == 3);

    const auto& root = t.node(t.root());
    CHECK(root.depth == 0);
    CHECK(root.parent == -1);
    CHECK(root.cond_prob == 1.0);
    REQUIRE(root.children.size() == 2);

    CHECK(t.at_depth(0).size() == 1);
    CHECK(t.at_depth(1).size() == 2);

    const int u = t.index_of("u");
    const int d = t.index_of("d");
    CHECK(t.delta_s(u)[0] == 1.0);
    CHECK(t.delta_s(d)[0] == -1.0);
    CHECK(t.path_prob(u) == 0.5);
    CHECK(t.is_leaf(u));
    CHECK_FALSE(t.is_leaf(t.root()));

    CHECK(t.cond_expect(t.root(), {{"u", 1.0}, {"d", 0.0}}) == 0.5);
    CHECK(t.total_expect({{"u", 3.0}, {"d", 1.0}}) == 2.0);
    CHECK(t.total_expect([](int) { return 1.0; }) == 1.0);
}

TEST_CASE("two-period fixture folds expectations through the tower property") {
    auto t = ScenarioTree::load(fixture("tree_binomial_t2.json"));
    CHECK(t.horizon() == 2);
    CHECK(t.node_count() == 7);
    CHECK(t.at_depth(2).size() == 4);
    CHECK(t.path_prob(t.index_of("uu")) == 0.25);

    // E(S_2 - S_0) = 0 cent by cent: the iid +/-1 moves are fair
    const double ev = t.total_expect([&](int leaf) { return t.node(leaf).price[0]; });
    CHECK(ev == doctest::Approx(t.node(t.root()).price[0]).epsilon(1e-15));
}

TEST_CASE("conditional probabilities renormalize exactly when nearly one") {
    std::string body = R"({
      "d": 1, "horizon": 1,
      "nodes": [
        {"id": "r", "parent": null, "cond_prob": 1.0, "price": [0.0]},
        {"id": "u", "parent": "r", "cond_prob": 0.5, "price": [1.0]},
        {"id": "d", "parent": "r", "cond_prob": 0.50000000000001, "price": [-1.0]}
      ]})";
    auto t = ScenarioTree::load(body);
    double sum = 0.0;
    for (int ch : t.node(t.root()).children) sum += t.node(ch).cond_prob;
    CHECK(sum == 1.0);
}

TEST_CASE("probability sums beyond the tolerance are rejected") {
    std::string body = R"({
      "d": 1, "horizon": 1,
      "nodes": [
        {"id": "r", "parent": null, "cond_prob": 1.0, "price": [0.0]},
        {"id": "u", "parent": "r", "cond_prob": 0.5, "price": [1.0]},
        {"id": "d", "parent": "r", "cond_prob": 0.5001, "price": [-1.0]}
      ]})";
    CHECK(error_code<ValidationError>([&] { ScenarioTree::load(body); }) == "prob_sum");
}

TEST_CASE("structural violations are named") {
    auto code = [](const std::string& body) {
        return error_code<ValidationError>([&] { ScenarioTree::load(body); });
    };

    SUBCASE("duplicate id") {
        CHECK(code(R"({"d":1,"horizon":1,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0]},
            {"id":"u","parent":"r","cond_prob":0.5,"price":[1.0]},
            {"id":"u","parent":"r","cond_prob":0.5,"price":[-1.0]}]})") == "schema");
    }
    SUBCASE("unknown parent") {
        CHECK(code(R"({"d":1,"horizon":1,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0]},
            {"id":"u","parent":"zz","cond_prob":1.0,"price":[1.0]}]})") == "schema");
    }
    SUBCASE("two roots") {
        CHECK(code(R"({"d":1,"horizon":1,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0]},
            {"id":"s","parent":null,"cond_prob":1.0,"price":[0.0]}]})") == "schema");
    }
    SUBCASE("no root") {
        CHECK(code(R"({"d":1,"horizon":1,"nodes":[
            {"id":"a","parent":"b","cond_prob":1.0,"price":[0.0]},
            {"id":"b","parent":"a","cond_prob":1.0,"price":[0.0]}]})") == "schema");
    }
    SUBCASE("price length mismatch") {
        CHECK(code(R"({"d":2,"horizon":1,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0,0.0]},
            {"id":"u","parent":"r","cond_prob":1.0,"price":[1.0]}]})") == "schema");
    }
    SUBCASE("leaf short of the horizon") {
        CHECK(code(R"({"d":1,"horizon":2,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0]},
            {"id":"u","parent":"r","cond_prob":1.0,"price":[1.0]}]})") == "schema");
    }
    SUBCASE("nonpositive cond_prob") {
        CHECK(code(R"({"d":1,"horizon":1,"nodes":[
            {"id":"r","parent":null,"cond_prob":1.0,"price":[0.0]},
            {"id":"u","parent":"r","cond_prob":0.0,"price":[1.0]},
            {"id":"d","parent":"r","cond_prob":1.0,"price":[-1.0]}]})") == "schema");
    }
    SUBCASE("not json at all") { CHECK(code("]][[") == "schema"); }
}

TEST_CASE("lookups fail loudly") {
    auto t = ScenarioTree::load(fixture("tree_binomial_t1.json"));
    CHECK(error_code<ValidationError>([&] { t.index_of("nope"); }) == "unknown_node");
    CHECK(error_code<ValidationError>([&] { t.delta_s(t.root()); }) == "schema");
    CHECK(error_code<ValidationError>([&] {
              t.cond_expect(t.root(), std::map<std::string, double>{{"u", 1.0}});
          }) == "missing_value");
}

TEST_CASE("load_stream matches load") {
    std::istringstream in(fixture("tree_trinomial_t1.json"));
    auto t = ScenarioTree::load_stream(in);
    CHECK(t.node_count() == 4);
    CHECK(t.at_depth(1).size() == 3);
}

}  // TEST_SUITE
