#include "support.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <stdexcept>

namespace support {

using diffmod::Rng;
using diffmod::neuro::ConnectionGene;
using diffmod::neuro::LearningMode;
namespace neuro = diffmod::neuro;
namespace ark = diffmod::ark;

namespace {

constexpr int kSummerLearner = 17;  // (-3, 2), on the summer source
constexpr int kWinterLearner = 24;  // (3, 2), on the winter source
constexpr double kLearnerBias = 0.02;

}  // namespace

Genome two_path_network(bool branching) {
    Genome g = neuro::make_empty_genome(LearningMode::diffusion);
    for (int learner : {kSummerLearner, kWinterLearner}) g.nodes[static_cast<std::size_t>(learner)].bias = kLearnerBias;
    if (branching) {
        const int relays[3] = {9, 10, 11};
        for (int b = 0; b < 3; ++b) g.connections.push_back({b, relays[b], 1.0});
        for (int learner : {kSummerLearner, kWinterLearner}) {
            for (int relay : relays) g.connections.push_back({relay, learner, 0.0});
        }
    } else {
        for (int learner : {kSummerLearner, kWinterLearner}) {
            for (int b = 0; b < 3; ++b) g.connections.push_back({b, learner, 0.0});
        }
    }
    g.connections.push_back({kSummerLearner, neuro::kSummerOutput, 1.0});
    g.connections.push_back({kWinterLearner, neuro::kWinterOutput, 1.0});
    return g;
}

Genome random_tree_network(Rng& rng, int connections, int output) {
    Genome g = neuro::make_empty_genome(rng.bernoulli(0.5) ? LearningMode::diffusion : LearningMode::standard);
    for (std::size_t i = neuro::kInputCount; i < g.nodes.size(); ++i) g.nodes[i].bias = rng.uniform(-1.0, 1.0);
    std::vector<int> tree{output};
    std::vector<char> used(neuro::kNodeCount, 0);
    used[static_cast<std::size_t>(output)] = 1;
    for (int attempt = 0; static_cast<int>(g.connections.size()) < connections && attempt < 1000; ++attempt) {
        const int parent = tree[static_cast<std::size_t>(rng.below(tree.size()))];
        if (neuro::is_input(parent)) continue;
        std::vector<int> options;
        for (int id = 0; id < neuro::kNodeCount; ++id) {
            if (!used[static_cast<std::size_t>(id)] && neuro::layer_of(id) < neuro::layer_of(parent)) options.push_back(id);
        }
        if (options.empty()) continue;
        const int child = options[static_cast<std::size_t>(rng.below(options.size()))];
        used[static_cast<std::size_t>(child)] = 1;
        tree.push_back(child);
        g.connections.push_back({child, parent, rng.uniform(-1.0, 1.0)});
    }
    return g;
}

Genome random_small_network(Rng& rng, int connections, LearningMode mode) {
    Genome g = neuro::make_empty_genome(mode);
    for (std::size_t i = neuro::kInputCount; i < g.nodes.size(); ++i) {
        g.nodes[i].bias = rng.uniform(-1.0, 1.0);
        g.nodes[i].modul = rng.uniform();
    }
    for (int attempt = 0; static_cast<int>(g.connections.size()) < connections && attempt < 1000; ++attempt) {
        const int target = neuro::kInputCount + static_cast<int>(rng.below(neuro::kNodeCount - neuro::kInputCount));
        std::vector<int> options;
        for (int id = 0; id < neuro::kNodeCount; ++id) {
            if (neuro::layer_of(id) >= neuro::layer_of(target)) continue;
            const bool present = std::any_of(g.connections.begin(), g.connections.end(), [&](const ConnectionGene& c) {
                return c.source == id && c.target == target;
            });
            if (!present) options.push_back(id);
        }
        if (options.empty()) continue;
        const int source = options[static_cast<std::size_t>(rng.below(options.size()))];
        g.connections.push_back({source, target, rng.uniform(-1.0, 1.0)});
    }
    return g;
}

std::vector<double> repropagate(const Genome& genome, const ark::ActivationRecord& record, const std::vector<int>& keep,
                                int output) {
    std::vector<double> out(static_cast<std::size_t>(record.steps()));
    std::vector<double> a(genome.nodes.size());
    for (int t = 0; t < record.steps(); ++t) {
        for (int id = 0; id < neuro::kNodeCount; ++id) {
            if (neuro::is_input(id)) {
                a[static_cast<std::size_t>(id)] = record.at(t, id);
                continue;
            }
            double sum = 0.0;
            for (int c : keep) {
                const ConnectionGene& gene = genome.connections[static_cast<std::size_t>(c)];
                if (gene.target == id && !neuro::is_modulatory(genome, gene.source)) {
                    sum += gene.weight * a[static_cast<std::size_t>(gene.source)];
                }
            }
            a[static_cast<std::size_t>(id)] = neuro::squash(sum + genome.nodes[static_cast<std::size_t>(id)].bias);
        }
        out[static_cast<std::size_t>(t)] = a[static_cast<std::size_t>(output)];
    }
    return out;
}

MinimalSets exhaustive_minimal(const Genome& genome, const ark::ActivationRecord& record, int output,
                               double threshold) {
    const int m = static_cast<int>(genome.connections.size());
    if (m > 20) throw std::invalid_argument("too many connections for exhaustive search");
    const std::vector<double> y = record.column(output);
    MinimalSets best;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
        const int size = std::popcount(mask);
        if (best.size >= 0 && size > best.size) continue;
        std::vector<int> keep;
        for (int c = 0; c < m; ++c) {
            if (mask & (std::uint32_t{1} << c)) keep.push_back(c);
        }
        if (ark::ser(y, repropagate(genome, record, keep, output)) > threshold) continue;
        if (best.size < 0 || size < best.size) {
            best.size = size;
            best.sets.clear();
        }
        best.sets.push_back(std::move(keep));
    }
    std::sort(best.sets.begin(), best.sets.end());
    return best;
}

namespace {

class DotLexer {
public:
    explicit DotLexer(const std::string& text) : text_(text) {}

    // Empty optional-like: returns "" at end of input.
    std::string next() {
        skip();
        if (pos_ >= text_.size()) return {};
        const char c = text_[pos_];
        if (c == '"') return quoted();
        if (c == '-' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '>' || text_[pos_ + 1] == '-')) {
            pos_ += 2;
            return text_.substr(pos_ - 2, 2);
        }
        if (std::string_view("{}[];,=").find(c) != std::string_view::npos) {
            ++pos_;
            return std::string(1, c);
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    text_[pos_] == '.' || text_[pos_] == '-')) {
                if (text_[pos_] == '-' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '>' || text_[pos_ + 1] == '-')) break;
                ++pos_;
            }
            return "\x01" + text_.substr(start, pos_ - start);
        }
        throw std::runtime_error("unexpected character '" + std::string(1, c) + "' in DOT");
    }

    std::string peek() {
        const std::size_t saved = pos_;
        std::string token = next();
        pos_ = saved;
        return token;
    }

private:
    void skip() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_.compare(pos_, 2, "//") == 0) {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (text_.compare(pos_, 2, "/*") == 0) {
                const std::size_t end = text_.find("*/", pos_ + 2);
                if (end == std::string::npos) throw std::runtime_error("unterminated comment in DOT");
                pos_ = end + 2;
            } else {
                break;
            }
        }
    }

    std::string quoted() {
        std::string out = "\x01";
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                const char escaped = text_[pos_ + 1];
                if (escaped != '"' && escaped != '\\') out += '\\';
                out += escaped;
                pos_ += 2;
                continue;
            }
            out += text_[pos_++];
        }
        if (pos_ >= text_.size()) throw std::runtime_error("unterminated string in DOT");
        ++pos_;
        return out;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

bool is_id(const std::string& token) { return !token.empty() && token[0] == '\x01'; }

std::string id_of(const std::string& token) {
    if (!is_id(token)) throw std::runtime_error("expected an identifier in DOT, got '" + token + "'");
    return token.substr(1);
}

void expect(DotLexer& lex, const std::string& token) {
    const std::string got = lex.next();
    if (got != token) throw std::runtime_error("expected '" + token + "' in DOT, got '" + got + "'");
}

std::map<std::string, std::string> attribute_list(DotLexer& lex) {
    std::map<std::string, std::string> out;
    while (lex.peek() == "[") {
        lex.next();
        while (lex.peek() != "]") {
            const std::string key = id_of(lex.next());
            expect(lex, "=");
            out[key] = id_of(lex.next());
            if (lex.peek() == "," || lex.peek() == ";") lex.next();
        }
        lex.next();
    }
    return out;
}

}  // namespace

DotGraph parse_dot(const std::string& text) {
    DotLexer lex(text);
    DotGraph graph;
    std::string token = lex.next();
    if (is_id(token) && id_of(token) == "strict") token = lex.next();
    if (!is_id(token)) throw std::runtime_error("DOT must start with graph or digraph");
    const std::string kind = id_of(token);
    if (kind != "digraph" && kind != "graph") throw std::runtime_error("DOT must start with graph or digraph");
    graph.directed = kind == "digraph";
    if (is_id(lex.peek())) graph.name = id_of(lex.next());
    expect(lex, "{");
    const std::string edge_op = graph.directed ? "->" : "--";
    for (;;) {
        token = lex.next();
        if (token.empty()) throw std::runtime_error("unterminated DOT graph");
        if (token == "}") break;
        if (token == ";") continue;
        const std::string id = id_of(token);
        if ((id == "graph" || id == "node" || id == "edge") && lex.peek() == "[") {
            auto attrs = attribute_list(lex);
            if (id == "graph") graph.attributes.insert(attrs.begin(), attrs.end());
            continue;
        }
        if (lex.peek() == "=") {
            lex.next();
            graph.attributes[id] = id_of(lex.next());
            continue;
        }
        std::vector<std::string> chain{id};
        while (lex.peek() == "->" || lex.peek() == "--") {
            if (lex.next() != edge_op) throw std::runtime_error("edge operator does not match the graph kind");
            chain.push_back(id_of(lex.next()));
        }
        auto attrs = attribute_list(lex);
        if (chain.size() == 1) {
            graph.nodes[id].insert(attrs.begin(), attrs.end());
        } else {
            for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
                graph.nodes.try_emplace(chain[i]);
                graph.nodes.try_emplace(chain[i + 1]);
                graph.edges.push_back({chain[i], chain[i + 1], attrs});
            }
        }
    }
    if (!lex.next().empty()) throw std::runtime_error("trailing content after DOT graph");
    return graph;
}

}  // namespace support
