// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "sgcnn/graph_io.hpp"

#include "sgcnn/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace sgcnn {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace {

json graph_to_document(const AttributedGraph& graph) {
    json nodes = json::array();
    for (const auto& n : graph.nodes()) {
        json attrs = json::object();
        for (const auto& [k, v] : n.attributes) attrs[k] = v;
        nodes.push_back({{"id", n.id}, {"type", n.type}, {"attrs", std::move(attrs)}});
    }
    json edges = json::array();
    for (const auto& [i, j] : graph.edges()) edges.push_back({i, j});
    return {{"version", kGraphFormatVersion}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

AttributedGraph graph_from_document(const json& doc) {
    if (!doc.is_object()) throw IoError("graph document must be a JSON object");
    const int version = doc.value("version", 0);
    if (version != kGraphFormatVersion) {
        throw IoError("unsupported graph format version " + std::to_string(version));
    }
    AttributedGraph g;
    for (const auto& n : doc.at("nodes")) {
        NodeRecord rec;
        rec.id = n.value("id", std::string{});
        rec.type = n.value("type", std::string{});
        if (auto it = n.find("attrs"); it != n.end()) {
            for (const auto& [k, v] : it->items()) rec.attributes[k] = v.get<std::string>();
        }
        g.add_node(std::move(rec));
    }
    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw IoError("edge entries must be [i, j] pairs");
        const auto a = e[0].get<std::size_t>();
        const auto b = e[1].get<std::size_t>();
        try {
            if (!g.add_edge(a, b)) {
                throw IoError("duplicate edge [" + std::to_string(a) + ", " + std::to_string(b) + "]");
            }
        } catch (const ContractError& err) {
            throw IoError(std::string("invalid edge: ") + err.what());
        }
    }
    return g;
}

}  // namespace

std::string graph_to_json(const AttributedGraph& graph) { return graph_to_document(graph).dump(); }

AttributedGraph graph_from_json(std::string_view text) {
    try {
        return graph_from_document(json::parse(text));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed graph JSON: ") + e.what());
    }
}

AttributedGraph read_graph_file(const std::filesystem::path& path) {
    return graph_from_json(read_text_file(path));
}

void write_graph_file(const std::filesystem::path& path, const AttributedGraph& graph) {
    write_text_file(path, graph_to_document(graph).dump(1) + "\n");
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    const auto base = path.parent_path();
    std::map<std::string, std::shared_ptr<const AttributedGraph>> file_hosts;
    Dataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const json rec = json::parse(line);
            std::shared_ptr<const AttributedGraph> host;
            if (auto it = rec.find("graph"); it != rec.end()) {
                host = std::make_shared<const AttributedGraph>(graph_from_document(*it));
            } else if (auto f = rec.find("graph_file"); f != rec.end()) {
                std::filesystem::path gp = f->get<std::string>();
                if (gp.is_relative()) gp = base / gp;
                auto& slot = file_hosts[gp.string()];
                if (!slot) slot = std::make_shared<const AttributedGraph>(read_graph_file(gp));
                host = slot;
            } else {
                throw IoError("record has neither 'graph' nor 'graph_file'");
            }
            std::unordered_map<std::string, std::size_t> by_id;
            std::vector<std::size_t> targets;
            for (const auto& t : rec.at("target_nodes")) {
                if (t.is_string()) {
                    if (by_id.empty()) {
                        for (std::size_t i = 0; i < host->node_count(); ++i) by_id[host->node(i).id] = i;
                    }
                    auto found = by_id.find(t.get<std::string>());
                    if (found == by_id.end()) throw IoError("unknown node id '" + t.get<std::string>() + "'");
                    targets.push_back(found->second);
                } else {
                    targets.push_back(t.get<std::size_t>());
                }
            }
            std::optional<int> label;
            if (auto l = rec.find("label"); l != rec.end() && !l->is_null()) label = l->get<int>();
            out.emplace_back(host, std::move(targets), label);
        } catch (const json::exception& e) {
            throw IoError(where + e.what());
        } catch (const Error& e) {
            throw IoError(where + e.what());
        }
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ostringstream out;
    for (const auto& sample : dataset) {
        json rec;
        rec["graph"] = graph_to_document(sample.host());
        rec["target_nodes"] = std::vector<std::size_t>(sample.node_indices().begin(),
                                                       sample.node_indices().end());
        if (sample.label()) {
            rec["label"] = *sample.label();
        } else {
            rec["label"] = nullptr;
        }
        out << rec.dump() << '\n';
    }
    write_text_file(path, out.str());
}

}  // namespace sgcnn
