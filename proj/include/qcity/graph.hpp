#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcity/text.hpp"

namespace qcity {

// Undirected weighted graph over terms and entity ids. Edge weight is the
// number of blocks in which both endpoints occur.
class CooccurrenceGraph {
public:
    void add_node(const std::string& node);
    // Self-loops are ignored.
    void add_edge(const std::string& u, const std::string& v, std::int64_t weight = 1);

    const std::set<std::string>& nodes() const { return m_nodes; }
    std::int64_t weight(const std::string& u, const std::string& v) const;
    // (neighbor, weight) pairs in ascending neighbor order.
    const std::map<std::string, std::int64_t>& neighbors(const std::string& u) const;
    std::size_t edge_count() const;

private:
    std::set<std::string> m_nodes;
    std::map<std::string, std::map<std::string, std::int64_t>> m_adj;
};

// Nodes per block: entities found by `gaz` plus members of `terms` present
// among the block's tokens. Each element of `blocks` is one block's social
// texts.
CooccurrenceGraph build_cooccurrence(std::span<const std::vector<std::string>> blocks, const Gazetteer& gaz,
    const std::set<std::string>& terms);

// Label propagation with a fixed schedule: labels start as node ids, nodes
// update in ascending id order, each taking the heaviest neighbour label
// (smallest label on ties), until no label changes or `max_iterations`.
// Classes are sorted, and ordered by their first member.
std::vector<std::vector<std::string>> detect_communities(const CooccurrenceGraph& graph,
    std::size_t max_iterations = 100);

} // namespace qcity
