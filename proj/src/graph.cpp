#include "qcity/graph.hpp"

#include <algorithm>

namespace qcity {

void CooccurrenceGraph::add_node(const std::string& node) {
    m_nodes.insert(node);
}

void CooccurrenceGraph::add_edge(const std::string& u, const std::string& v, std::int64_t weight) {
    add_node(u);
    add_node(v);
    if (u == v) {
        return;
    }
    m_adj[u][v] += weight;
    m_adj[v][u] += weight;
}

std::int64_t CooccurrenceGraph::weight(const std::string& u, const std::string& v) const {
    auto it = m_adj.find(u);
    if (it == m_adj.end()) {
        return 0;
    }
    auto jt = it->second.find(v);
    return jt == it->second.end() ? 0 : jt->second;
}

const std::map<std::string, std::int64_t>& CooccurrenceGraph::neighbors(const std::string& u) const {
    static const std::map<std::string, std::int64_t> none;
    auto it = m_adj.find(u);
    return it == m_adj.end() ? none : it->second;
}

std::size_t CooccurrenceGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& [_, nbrs] : m_adj) {
        n += nbrs.size();
    }
    return n / 2;
}

CooccurrenceGraph build_cooccurrence(std::span<const std::vector<std::string>> blocks, const Gazetteer& gaz,
    const std::set<std::string>& terms) {
    CooccurrenceGraph graph;
    for (const auto& texts : blocks) {
        std::set<std::string> present;
        for (const auto& text : texts) {
            auto tokens = tokenize(text);
            for (auto& m : gaz.match(tokens)) {
                present.insert(std::move(m.mention.entity_id));
            }
            for (auto& t : tokens) {
                if (terms.count(t)) {
                    present.insert(std::move(t));
                }
            }
        }
        for (const auto& node : present) {
            graph.add_node(node);
        }
        for (auto a = present.begin(); a != present.end(); ++a) {
            for (auto b = std::next(a); b != present.end(); ++b) {
                graph.add_edge(*a, *b);
            }
        }
    }
    return graph;
}

std::vector<std::vector<std::string>> detect_communities(const CooccurrenceGraph& graph,
    std::size_t max_iterations) {
    std::map<std::string, std::string> label;
    for (const auto& n : graph.nodes()) {
        label[n] = n;
    }
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (auto& [node, current] : label) {
            const auto& nbrs = graph.neighbors(node);
            if (nbrs.empty()) {
                continue;
            }
            std::map<std::string, std::int64_t> votes;
            for (const auto& [nbr, w] : nbrs) {
                votes[label.at(nbr)] += w;
            }
            auto best = votes.begin();
            for (auto it = votes.begin(); it != votes.end(); ++it) {
                if (it->second > best->second) {
                    best = it;
                }
            }
            if (best->first != current) {
                current = best->first;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }
    std::map<std::string, std::vector<std::string>> classes;
    for (const auto& [node, l] : label) {
        classes[l].push_back(node);
    }
    std::vector<std::vector<std::string>> out;
    out.reserve(classes.size());
    for (auto& [_, members] : classes) {
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

} // namespace qcity
