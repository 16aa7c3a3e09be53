#include "ncu/tree.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ncu/errors.hpp"

namespace ncu {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw ValidationError("schema", "tree: " + what + " at " + where);
}

}  // namespace

ScenarioTree ScenarioTree::load_stream(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

ScenarioTree ScenarioTree::load(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("schema", std::string("tree: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_error("document", "expected an object");
    for (const char* key : {"d", "horizon", "nodes"}) {
        if (!doc.contains(key)) schema_error("document", std::string("missing field \"") + key + "\"");
    }
    if (!doc["d"].is_number_integer() || doc["d"].get<int>() < 1)
        schema_error("d", "d must be an integer >= 1");
    if (!doc["horizon"].is_number_integer() || doc["horizon"].get<int>() < 1)
        schema_error("horizon", "horizon must be an integer >= 1");
    if (!doc["nodes"].is_array() || doc["nodes"].empty())
        schema_error("nodes", "nodes must be a non-empty array");

    const int d = doc["d"].get<int>();
    const int horizon = doc["horizon"].get<int>();

    std::vector<Node> nodes;
    nodes.reserve(doc["nodes"].size());
    std::unordered_map<std::string, int> index;
    std::vector<std::string> parent_ids(doc["nodes"].size());

    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object()) schema_error("nodes", "node entries must be objects");
        if (!jn.contains("id") || !jn["id"].is_string())
            schema_error("nodes", "node missing string \"id\"");
        Node n;
        n.id = jn["id"].get<std::string>();
        if (index.count(n.id)) schema_error(n.id, "duplicate node id");
        if (!jn.contains("parent") || !(jn["parent"].is_string() || jn["parent"].is_null()))
            schema_error(n.id, "missing \"parent\" (string or null)");
        if (!jn.contains("cond_prob") || !jn["cond_prob"].is_number())
            schema_error(n.id, "missing numeric \"cond_prob\"");
        n.cond_prob = jn["cond_prob"].get<double>();
        if (!jn.contains("price") || !jn["price"].is_array() ||
            static_cast<int>(jn["price"].size()) != d)
            schema_error(n.id, "\"price\" must be an array of length d=" + std::to_string(d));
        for (const auto& p : jn["price"]) {
            if (!p.is_number()) schema_error(n.id, "price entries must be numbers");
            n.price.push_back(p.get<double>());
        }
        parent_ids[nodes.size()] = jn["parent"].is_null() ? std::string() : jn["parent"].get<std::string>();
        n.parent = jn["parent"].is_null() ? -1 : -2;  // resolved below
        index.emplace(n.id, static_cast<int>(nodes.size()));
        nodes.push_back(std::move(n));
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].parent == -1) continue;
        auto it = index.find(parent_ids[i]);
        if (it == index.end())
            schema_error(nodes[i].id, "unknown parent \"" + parent_ids[i] + "\"");
        nodes[i].parent = it->second;
    }

    return build(d, horizon, std::move(nodes));
}

ScenarioTree ScenarioTree::build(int dim, int horizon, std::vector<Node> nodes) {
    ScenarioTree t;
    t.dim_ = dim;
    t.horizon_ = horizon;
    t.nodes_ = std::move(nodes);
    t.validate_and_index();
    return t;
}

void ScenarioTree::validate_and_index() {
    const int n = static_cast<int>(nodes_.size());
    root_ = -1;
    for (int i = 0; i < n; ++i) {
        Node& nd = nodes_[static_cast<std::size_t>(i)];
        nd.children.clear();
        if (static_cast<int>(nd.price.size()) != dim_)
            throw ValidationError("schema", "tree: price length != d at " + nd.id);
        if (nd.parent == -1) {
            if (root_ != -1)
                throw ValidationError("schema", "tree: multiple roots (" +
                                                    nodes_[static_cast<std::size_t>(root_)].id + ", " + nd.id + ")");
            root_ = i;
        } else if (nd.parent < 0 || nd.parent >= n || nd.parent == i) {
            throw ValidationError("schema", "tree: bad parent index at " + nd.id);
        }
    }
    if (root_ == -1) throw ValidationError("schema", "tree: no root node (parent null)");

    for (int i = 0; i < n; ++i) {
        if (i == root_) continue;
        nodes_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(i)].parent)].children.push_back(i);
    }

    // Depths derive from the parent chain; cycles surface as chains longer
    // than the node count.
    for (int i = 0; i < n; ++i) {
        int depth = 0;
        int cur = i;
        while (nodes_[static_cast<std::size_t>(cur)].parent != -1) {
            cur = nodes_[static_cast<std::size_t>(cur)].parent;
            if (++depth > n)
                throw ValidationError("schema", "tree: parent cycle involving " + nodes_[static_cast<std::size_t>(i)].id);
        }
        nodes_[static_cast<std::size_t>(i)].depth = depth;
    }

    by_depth_.assign(static_cast<std::size_t>(horizon_) + 1, {});
    for (int i = 0; i < n; ++i) {
        const Node& nd = nodes_[static_cast<std::size_t>(i)];
        if (nd.depth > horizon_)
            throw ValidationError("schema", "tree: node deeper than horizon at " + nd.id);
        by_depth_[static_cast<std::size_t>(nd.depth)].push_back(i);
    }

    for (int i = 0; i < n; ++i) {
        const Node& nd = nodes_[static_cast<std::size_t>(i)];
        const bool leaf = nd.children.empty();
        if (leaf && nd.depth != horizon_)
            throw ValidationError("schema", "tree: leaf above horizon at " + nd.id +
                                                " (depth " + std::to_string(nd.depth) + ")");
        if (!leaf && nd.depth >= horizon_)
            throw ValidationError("schema", "tree: internal node at horizon depth at " + nd.id);
    }

    if (nodes_[static_cast<std::size_t>(root_)].cond_prob != 1.0) {
        // Tolerate inputs that omit a meaningful value only if exactly 1.
        if (std::abs(nodes_[static_cast<std::size_t>(root_)].cond_prob - 1.0) > 1e-12)
            throw ValidationError("schema", "tree: root cond_prob must be 1 at " +
                                                nodes_[static_cast<std::size_t>(root_)].id);
        nodes_[static_cast<std::size_t>(root_)].cond_prob = 1.0;
    }

    // Conditional probabilities: strictly positive, sum to 1 within 1e-12,
    // then renormalized exactly so downstream arithmetic sees a true
    // probability vector.
    for (int i = 0; i < n; ++i) {
        const Node& nd = nodes_[static_cast<std::size_t>(i)];
        if (nd.children.empty()) continue;
        double sum = 0.0;
        for (int c : nd.children) {
            double p = nodes_[static_cast<std::size_t>(c)].cond_prob;
            if (!(p > 0.0) || p > 1.0)
                throw ValidationError("schema", "tree: cond_prob must be in (0,1] at " +
                                                    nodes_[static_cast<std::size_t>(c)].id);
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "probabilities sum to " << sum << " at node " << nd.id;
            throw ValidationError("prob_sum", "tree: " + msg.str());
        }
        for (int c : nd.children) nodes_[static_cast<std::size_t>(c)].cond_prob /= sum;
    }
}

int ScenarioTree::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) return static_cast<int>(i);
    }
    throw ValidationError("unknown_node", "tree: unknown node id \"" + id + "\"");
}

std::vector<double> ScenarioTree::delta_s(int i) const {
    const Node& nd = node(i);
    if (nd.parent == -1)
        throw ValidationError("schema", "tree: root has no price increment");
    const Node& par = node(nd.parent);
    std::vector<double> ds(nd.price.size());
    for (std::size_t k = 0; k < ds.size(); ++k) ds[k] = nd.price[k] - par.price[k];
    return ds;
}

double ScenarioTree::path_prob(int i) const {
    double p = 1.0;
    int cur = i;
    while (cur != root_) {
        p *= node(cur).cond_prob;
        cur = node(cur).parent;
    }
    return p;
}

double ScenarioTree::cond_expect(int i, const std::function<double(int)>& child_value) const {
    const Node& nd = node(i);
    if (nd.children.empty())
        throw ValidationError("schema", "tree: cond_expect at leaf " + nd.id);
    double acc = 0.0;
    for (int c : nd.children) acc += node(c).cond_prob * child_value(c);
    return acc;
}

double ScenarioTree::cond_expect(int i, const std::map<std::string, double>& child_values) const {
    return cond_expect(i, [&](int c) {
        auto it = child_values.find(node(c).id);
        if (it == child_values.end())
            throw ValidationError("missing_value",
                                  "tree: missing child value for " + node(c).id);
        return it->second;
    });
}

double ScenarioTree::total_expect(const std::function<double(int)>& leaf_value) const {
    // Fold leaf values towards the root one depth at a time.
    std::vector<double> acc(nodes_.size(), 0.0);
    for (int i : at_depth(horizon_)) acc[static_cast<std::size_t>(i)] = leaf_value(i);
    for (int t = horizon_; t >= 1; --t) {
        for (int i : at_depth(t - 1)) {
            if (node(i).children.empty()) continue;
            acc[static_cast<std::size_t>(i)] =
                cond_expect(i, [&](int c) { return acc[static_cast<std::size_t>(c)]; });
        }
    }
    return acc[static_cast<std::size_t>(root_)];
}

double ScenarioTree::total_expect(const std::map<std::string, double>& leaf_values) const {
    return total_expect([&](int i) {
        auto it = leaf_values.find(node(i).id);
        if (it == leaf_values.end())
            throw ValidationError("missing_value",
                                  "tree: missing leaf value for " + node(i).id);
        return it->second;
    });
}

}  // namespace ncu
