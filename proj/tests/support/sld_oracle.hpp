#pragma once

// Brute-force breadth-first SLD oracle. Shares only the term reader and
// printer with the engine; search, renaming and unification are separate.

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ald/logic/engine.hpp"
#include "ald/logic/reader.hpp"

namespace ald::testing {

struct OTerm {
    bool is_var = false;
    int id = 0;
    std::string functor;
    std::vector<OTerm> args;
};

struct OClause {
    OTerm head;
    std::vector<OTerm> body;
    int nvars = 0;
};

struct OracleResult {
    bool overflow = false;
    bool occurs_hit = false;
    std::map<std::string, int> answers; ///< answer key -> shallowest proof depth
};

class SldOracle {
public:
    explicit SldOracle(const logic::Program& program)
    {
        for (const auto& c : program.clauses) {
            std::unordered_map<std::string, int> ids;
            OClause oc;
            oc.head = convert(c.head, ids);
            for (const auto& g : c.body) oc.body.push_back(convert(g, ids));
            oc.nvars = static_cast<int>(ids.size());
            clauses_.push_back(std::move(oc));
        }
    }

    OracleResult run(const logic::Term& query, int max_depth, std::size_t state_limit)
    {
        OracleResult result;
        std::unordered_map<std::string, int> ids;
        std::vector<std::string> order = logic::variable_names(query);
        State init;
        for (const auto& g : logic::flatten_conjunction(query)) init.goals.push_back({convert(g, ids), 1});
        for (const auto& name : order) init.answer.push_back(OTerm{true, ids.at(name), {}, {}});
        next_id_ = static_cast<int>(ids.size()) + 1;

        std::deque<State> queue{std::move(init)};
        std::size_t expanded = 0;
        while (!queue.empty()) {
            if (++expanded > state_limit) {
                result.overflow = true;
                return result;
            }
            State s = std::move(queue.front());
            queue.pop_front();
            if (s.goals.empty()) {
                std::string key = answer_key(order, s.answer);
                auto [it, inserted] = result.answers.try_emplace(key, s.height);
                if (!inserted && s.height < it->second) it->second = s.height;
                continue;
            }
            auto [goal, depth] = s.goals.front();
            if (depth > max_depth) continue;
            for (const auto& clause : clauses_) {
                if (clause.head.functor != goal.functor || clause.head.args.size() != goal.args.size()) continue;
                int base = next_id_;
                next_id_ += clause.nvars + 1;
                OTerm head = rename(clause.head, base);
                std::map<int, OTerm> subst;
                bool occurs = false;
                if (!unify(goal, head, subst, occurs)) {
                    result.occurs_hit = result.occurs_hit || occurs;
                    continue;
                }
                State n;
                for (const auto& b : clause.body) n.goals.push_back({apply(rename(b, base), subst), depth + 1});
                for (std::size_t i = 1; i < s.goals.size(); ++i)
                    n.goals.push_back({apply(s.goals[i].first, subst), s.goals[i].second});
                for (const auto& a : s.answer) n.answer.push_back(apply(a, subst));
                n.height = std::max(s.height, depth);
                queue.push_back(std::move(n));
            }
        }
        return result;
    }

private:
    struct State {
        std::vector<std::pair<OTerm, int>> goals;
        std::vector<OTerm> answer;
        int height = 0;
    };

    static OTerm convert(const logic::Term& t, std::unordered_map<std::string, int>& ids)
    {
        OTerm o;
        if (t.is_var()) {
            o.is_var = true;
            auto [it, inserted] = ids.try_emplace(t.name(), static_cast<int>(ids.size()) + 1);
            o.id = it->second;
            return o;
        }
        o.functor = t.is_integer() ? "#" + std::to_string(t.value()) : t.name();
        for (const auto& a : t.args()) o.args.push_back(convert(a, ids));
        return o;
    }

    static OTerm rename(const OTerm& t, int base)
    {
        if (t.is_var) return OTerm{true, t.id + base, {}, {}};
        OTerm o{false, 0, t.functor, {}};
        for (const auto& a : t.args) o.args.push_back(rename(a, base));
        return o;
    }

    static OTerm walk(const OTerm& t, const std::map<int, OTerm>& s)
    {
        const OTerm* cur = &t;
        while (cur->is_var) {
            auto it = s.find(cur->id);
            if (it == s.end()) break;
            cur = &it->second;
        }
        return *cur;
    }

    static OTerm apply(const OTerm& t, const std::map<int, OTerm>& s)
    {
        OTerm w = walk(t, s);
        if (w.is_var) return w;
        for (auto& a : w.args) a = apply(a, s);
        return w;
    }

    static bool occurs_in(int id, const OTerm& t, const std::map<int, OTerm>& s)
    {
        OTerm w = walk(t, s);
        if (w.is_var) return w.id == id;
        for (const auto& a : w.args)
            if (occurs_in(id, a, s)) return true;
        return false;
    }

    static bool unify(const OTerm& a, const OTerm& b, std::map<int, OTerm>& s, bool& occurs)
    {
        OTerm x = walk(a, s);
        OTerm y = walk(b, s);
        if (x.is_var && y.is_var && x.id == y.id) return true;
        if (x.is_var || y.is_var) {
            const OTerm& v = x.is_var ? x : y;
            const OTerm& other = x.is_var ? y : x;
            if (occurs_in(v.id, other, s)) {
                occurs = true;
                return false;
            }
            s[v.id] = other;
            return true;
        }
        if (x.functor != y.functor || x.args.size() != y.args.size()) return false;
        for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!unify(x.args[i], y.args[i], s, occurs)) return false;
        return true;
    }

    static logic::Term to_term(const OTerm& t, std::map<int, std::string>& names, int& fresh)
    {
        if (t.is_var) {
            auto [it, inserted] = names.try_emplace(t.id, std::string());
            if (inserted) it->second = "_" + std::to_string(++fresh);
            return logic::Term::var(it->second);
        }
        if (!t.functor.empty() && t.functor[0] == '#') return logic::Term::integer(std::stoll(t.functor.substr(1)));
        if (t.args.empty()) return logic::Term::atom(t.functor);
        std::vector<logic::Term> args;
        for (const auto& a : t.args) args.push_back(to_term(a, names, fresh));
        return logic::Term::compound(t.functor, std::move(args));
    }

    static std::string answer_key(const std::vector<std::string>& order, const std::vector<OTerm>& values)
    {
        std::map<int, std::string> names;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (order[i][0] != '_' && values[i].is_var) names.try_emplace(values[i].id, order[i]);
        int fresh = 0;
        std::string key;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (order[i][0] == '_') continue;
            logic::Term t = to_term(values[i], names, fresh);
            if (t.is_var() && t.name() == order[i]) continue;
            if (!key.empty()) key += ", ";
            key += order[i] + " = " + logic::format_term(t);
        }
        return key;
    }

    std::vector<OClause> clauses_;
    int next_id_ = 1;
};

struct RandomCase {
    std::string program;
    std::string query;
};

// Small pure Horn programs over p/1, q/2, r/1, s/2 with constants a, b, c
// and functors f/1, g/2.
class RandomProgramGenerator {
public:
    explicit RandomProgramGenerator(std::uint32_t seed) : rng_(seed) {}

    RandomCase next()
    {
        RandomCase c;
        int nclauses = pick(3, 30);
        for (int i = 0; i < nclauses; ++i) c.program += clause() + "\n";
        auto [name, arity] = pred();
        c.query = name + "(";
        for (int i = 0; i < arity; ++i) {
            if (i) c.query += ",";
            c.query += pick(0, 2) == 0 ? constant() : std::string(1, "XYZ"[i]);
        }
        c.query += ")";
        return c;
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::pair<std::string, int> pred()
    {
        static const std::pair<const char*, int> preds[] = {{"p", 1}, {"q", 2}, {"r", 1}, {"s", 2}};
        auto p = preds[pick(0, 3)];
        return {p.first, p.second};
    }

    std::string constant() { return std::string(1, "abc"[pick(0, 2)]); }
    std::string var() { return std::string(1, "XYZ"[pick(0, 2)]); }

    std::string term(int depth)
    {
        int k = pick(0, depth > 0 ? 5 : 3);
        if (k <= 1) return var();
        if (k <= 3) return constant();
        if (k == 4) return "f(" + term(depth - 1) + ")";
        return "g(" + term(depth - 1) + "," + term(depth - 1) + ")";
    }

    std::string atom_goal(int depth)
    {
        auto [name, arity] = pred();
        std::string out = name + "(";
        for (int i = 0; i < arity; ++i) {
            if (i) out += ",";
            out += term(depth);
        }
        return out + ")";
    }

    std::string clause()
    {
        std::string out = atom_goal(2);
        int nbody = pick(0, 2);
        for (int i = 0; i < nbody; ++i) out += (i ? ", " : " :- ") + atom_goal(1);
        return out + ".";
    }

    std::mt19937 rng_;
};

/// Runs both the engine and the oracle; returns a mismatch description, or
/// nullopt on agreement. `skipped` is set when the case falls outside what
/// the oracle can judge (occurs-check divergence or state explosion).
inline std::optional<std::string> cross_check(const logic::Program& program, const logic::Term& query,
                                              int max_depth, bool& skipped)
{
    skipped = false;
    SldOracle oracle(program);
    OracleResult expected = oracle.run(query, max_depth, 200000);
    if (expected.overflow || expected.occurs_hit) {
        skipped = true;
        return std::nullopt;
    }
    logic::Program fair = program;
    fair.fair_search = true;
    logic::Budget budget{max_depth, 50'000'000, 100000};
    std::vector<logic::Answer> got;
    try {
        got = logic::solve(fair, query, budget).answers;
    } catch (const logic::EngineError& e) {
        if (e.kind() != logic::EngineErrorKind::budget_exhausted) return std::string("engine error: ") + e.what();
    }
    std::map<std::string, int> got_map;
    int last_depth = 0;
    for (const auto& a : got) {
        if (a.proof_depth < last_depth) return "answers not ordered by depth at " + a.key();
        last_depth = a.proof_depth;
        if (!got_map.emplace(a.key(), a.proof_depth).second) return "duplicate answer " + a.key();
    }
    if (got_map != expected.answers) {
        std::string msg = "engine {";
        for (const auto& [k, d] : got_map) msg += "[" + k + "]@" + std::to_string(d) + " ";
        msg += "} oracle {";
        for (const auto& [k, d] : expected.answers) msg += "[" + k + "]@" + std::to_string(d) + " ";
        return msg + "}";
    }
    return std::nullopt;
}

} // namespace ald::testing
