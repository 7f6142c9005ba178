#include "vfloc/grid.hpp"

#include <algorithm>
#include <queue>

#include "vfloc/errors.hpp"

namespace vfloc {

GridModel GridModel::build(const GridConfig& config) {
    GridModel model;
    model.config_ = config;

    if (config.nodes.empty()) throw DisconnectedNode("grid has no nodes");
    for (const auto& id : config.nodes) {
        if (model.index_.count(id)) throw CycleDetected("duplicate node id: " + id);
        model.index_[id] = static_cast<int>(model.node_ids_.size());
        model.node_ids_.push_back(id);
    }
    if (!model.index_.count(config.slack)) throw UnknownNode("slack node not in node list: " + config.slack);
    if (config.source_r_mohm < 0.0 || config.source_x_mohm < 0.0)
        throw NegativeImpedance("source impedance must be non-negative");
    if (config.u_nominal_v <= 0.0) throw std::invalid_argument("u_nominal must be > 0");

    const std::size_t n = model.node_ids_.size();
    std::vector<std::vector<std::pair<int, std::complex<double>>>> adj(n);
    for (const GridEdge& e : config.edges) {
        if (!model.index_.count(e.from)) throw UnknownNode("edge endpoint unknown: " + e.from);
        if (!model.index_.count(e.to)) throw UnknownNode("edge endpoint unknown: " + e.to);
        if (e.r_mohm < 0.0 || e.x_mohm < 0.0)
            throw NegativeImpedance("edge " + e.from + "-" + e.to + " has negative impedance");
        const int a = model.index_.at(e.from);
        const int b = model.index_.at(e.to);
        if (a == b) throw CycleDetected("self loop at node " + e.from);
        adj[a].emplace_back(b, std::complex<double>(e.r_mohm, e.x_mohm));
        adj[b].emplace_back(a, std::complex<double>(e.r_mohm, e.x_mohm));
    }

    // BFS from slack; with every node reachable, a tree has exactly n-1 edges.
    model.parent_.assign(n, -1);
    model.parent_z_.assign(n, {0.0, 0.0});
    model.depth_.assign(n, 0);
    std::vector<char> visited(n, 0);
    const int root = model.index_.at(config.slack);
    visited[static_cast<std::size_t>(root)] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& [v, z] : adj[u]) {
            if (visited[static_cast<std::size_t>(v)]) continue;
            visited[static_cast<std::size_t>(v)] = 1;
            model.parent_[static_cast<std::size_t>(v)] = u;
            model.parent_z_[static_cast<std::size_t>(v)] = z;
            model.depth_[static_cast<std::size_t>(v)] = model.depth_[static_cast<std::size_t>(u)] + 1;
            q.push(v);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!visited[i]) throw DisconnectedNode("node " + model.node_ids_[i] + " unreachable from slack");
    }
    if (config.edges.size() != n - 1)
        throw CycleDetected("edge count does not match a radial topology");
    return model;
}

bool GridModel::has_node(const std::string& id) const { return index_.count(id) > 0; }

int GridModel::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownNode("unknown node: " + id);
    return it->second;
}

int GridModel::depth(const std::string& node) const {
    return depth_[static_cast<std::size_t>(index_of(node))];
}

std::vector<int> GridModel::path_from_slack(int node) const {
    std::vector<int> path;
    for (int u = node; u != -1; u = parent_[static_cast<std::size_t>(u)]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
}

std::complex<double> GridModel::shared_path_impedance(const std::string& source,
                                                      const std::string& meter) const {
    const std::vector<int> ps = path_from_slack(index_of(source));
    const std::vector<int> pm = path_from_slack(index_of(meter));
    std::complex<double> z(config_.source_r_mohm, config_.source_x_mohm);
    const std::size_t common = std::min(ps.size(), pm.size());
    for (std::size_t i = 1; i < common; ++i) {
        if (ps[i] != pm[i]) break;
        z += parent_z_[static_cast<std::size_t>(ps[i])];
    }
    return z;
}

GridModel build_grid(const GridConfig& config) { return GridModel::build(config); }

double coupling_coefficient(const GridModel& grid, const std::string& source,
                            const std::string& meter, double delta_current_a) {
    if (delta_current_a < 0.0) throw std::invalid_argument("delta_current must be >= 0");
    const std::complex<double> z = grid.shared_path_impedance(source, meter);
    return delta_current_a * std::abs(z) * 1e-3;  // mohm -> ohm
}

std::string localize(const AmplitudeProfile& profile, const GridModel& grid, double tie_rel) {
    if (profile.entries.empty()) throw EmptyProfile("localize: empty amplitude profile");
    double max_a = 0.0;
    for (const auto& [node, a] : profile.entries) {
        if (!grid.has_node(node)) throw UnknownNode("profile node not in grid: " + node);
        max_a = std::max(max_a, a);
    }
    // all tied nodes within tie_rel of the maximum; upstream-most wins
    std::string best;
    int best_depth = 0;
    for (const auto& [node, a] : profile.entries) {
        if (a + tie_rel * max_a < max_a) continue;
        const int d = grid.depth(node);
        if (best.empty() || d < best_depth || (d == best_depth && node < best)) {
            best = node;
            best_depth = d;
        }
    }
    return best;
}

}  // namespace vfloc
