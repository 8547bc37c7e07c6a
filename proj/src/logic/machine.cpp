#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ald/logic/engine.hpp"

namespace ald::logic {
namespace {

// Heap cells. Ref cells hold a heap index and are unbound when they point at
// themselves. A Str cell points at a Fun cell, which is followed by its
// arguments.
enum class Tag : std::uint8_t { Ref, Atom, Int, Str, Fun };

struct Cell {
    Tag tag = Tag::Atom;
    std::uint32_t arity = 0;
    std::int64_t val = 0;
};

constexpr Cell make_ref(std::int64_t i) { return {Tag::Ref, 0, i}; }
constexpr Cell make_atom(std::uint32_t id) { return {Tag::Atom, 0, id}; }
constexpr Cell make_int(std::int64_t v) { return {Tag::Int, 0, v}; }
constexpr Cell make_str(std::int64_t i) { return {Tag::Str, 0, i}; }
constexpr Cell make_fun(std::uint32_t id, std::uint32_t n) { return {Tag::Fun, n, id}; }

bool relocatable(const Cell& c) { return c.tag == Tag::Ref || c.tag == Tag::Str; }

class AtomTable {
public:
    std::uint32_t intern(const std::string& name)
    {
        auto [it, inserted] = ids_.try_emplace(name, static_cast<std::uint32_t>(names_.size()));
        if (inserted) names_.push_back(name);
        return it->second;
    }
    const std::string& name(std::int64_t id) const { return names_.at(static_cast<std::size_t>(id)); }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::vector<std::string> names_;
};

// Builds terms into a cell vector. Ref and Str values are relative to the
// start of that vector.
class TermBuilder {
public:
    TermBuilder(AtomTable& atoms, std::vector<Cell>& cells) : atoms_(atoms), cells_(cells) {}

    Cell build_root(const Term& t)
    {
        std::size_t slot = cells_.size();
        cells_.emplace_back();
        build_into(slot, t);
        return cells_[slot];
    }

    const std::unordered_map<std::string, std::int64_t>& vars() const { return vars_; }

private:
    void build_into(std::size_t slot, const Term& t)
    {
        switch (t.kind()) {
        case Term::Kind::Var: {
            auto [it, inserted] = vars_.try_emplace(t.name(), static_cast<std::int64_t>(slot));
            cells_[slot] = make_ref(it->second);
            return;
        }
        case Term::Kind::Atom:
            cells_[slot] = make_atom(atoms_.intern(t.name()));
            return;
        case Term::Kind::Integer:
            cells_[slot] = make_int(t.value());
            return;
        case Term::Kind::Compound: {
            std::size_t fun = cells_.size();
            auto n = static_cast<std::uint32_t>(t.arity());
            cells_.push_back(make_fun(atoms_.intern(t.name()), n));
            cells_.resize(cells_.size() + n);
            for (std::uint32_t i = 0; i < n; ++i) build_into(fun + 1 + i, t.arg(i));
            cells_[slot] = make_str(static_cast<std::int64_t>(fun));
            return;
        }
        }
    }

    AtomTable& atoms_;
    std::vector<Cell>& cells_;
    std::unordered_map<std::string, std::int64_t> vars_;
};

struct IndexKey {
    bool present = false;
    Tag tag = Tag::Atom;
    std::uint32_t arity = 0;
    std::int64_t val = 0;

    bool clashes(const IndexKey& o) const
    {
        return present && o.present && (tag != o.tag || arity != o.arity || val != o.val);
    }
};

struct CompiledClause {
    std::vector<Cell> cells;
    Cell head;
    std::vector<Cell> body;
    IndexKey first_arg;
};

std::uint64_t pred_key(std::int64_t atom, std::uint32_t arity)
{
    return (static_cast<std::uint64_t>(atom) << 32) | arity;
}

enum class Builtin {
    none, conj, true_, fail, unify, is, lt, gt, le, ge, eq, ne, var, nonvar, list
};

class Machine {
public:
    Machine(const Program& program, const Budget& budget, std::stop_token stop)
        : budget_(budget), stop_(std::move(stop))
    {
        struct Named {
            const char* name;
            std::uint32_t arity;
            Builtin b;
        };
        static constexpr Named builtins[] = {
            {",", 2, Builtin::conj}, {"true", 0, Builtin::true_}, {"fail", 0, Builtin::fail},
            {"false", 0, Builtin::fail}, {"=", 2, Builtin::unify}, {"is", 2, Builtin::is},
            {"<", 2, Builtin::lt}, {">", 2, Builtin::gt}, {"=<", 2, Builtin::le},
            {">=", 2, Builtin::ge}, {"=:=", 2, Builtin::eq}, {"=\\=", 2, Builtin::ne},
            {"var", 1, Builtin::var}, {"nonvar", 1, Builtin::nonvar}, {"list", 1, Builtin::list},
        };
        for (const auto& b : builtins) builtins_.emplace(pred_key(atoms_.intern(b.name), b.arity), b.b);
        nil_ = atoms_.intern("[]");
        dot_ = atoms_.intern(".");
        plus_ = atoms_.intern("+");
        minus_ = atoms_.intern("-");
        times_ = atoms_.intern("*");
        intdiv_ = atoms_.intern("//");

        for (const auto& clause : program.clauses) compile(clause);
    }

    // Runs one depth-bounded search. on_answer returns false to stop.
    template <class OnAnswer>
    void run(const Term& query, int limit, OnAnswer&& on_answer)
    {
        heap_.clear();
        trail_.clear();
        frames_.clear();
        choices_.clear();
        limit_ = limit;
        cutoff_ = false;
        query_vars_.clear();

        std::vector<Cell> cells;
        TermBuilder builder(atoms_, cells);
        Cell root = builder.build_root(query);
        heap_ = std::move(cells);
        for (const auto& [name, idx] : builder.vars()) query_vars_.emplace_back(name, idx);
        query_order_ = variable_names(query);

        frames_.push_back({root, 1, -1});
        cont_ = 0;
        max_seen_ = 0;

        while (true) {
            if (cont_ < 0) {
                if (!on_answer(max_seen_)) return;
                if (!backtrack()) return;
                continue;
            }
            if (!step()) {
                if (steps_exceeded_) return;
                if (!backtrack()) return;
            }
        }
    }

    bool cutoff() const { return cutoff_; }
    bool has_choices() const { return !choices_.empty(); }
    bool steps_exceeded() const { return steps_exceeded_; }
    std::int64_t steps() const { return steps_; }

    // Extracts bindings for the named query variables; nullopt for a cyclic result.
    std::optional<Answer> extract_answer(int depth)
    {
        std::unordered_map<std::int64_t, std::string> names;
        for (const auto& name : query_order_) {
            if (name[0] == '_') continue;
            Cell d = deref(make_ref(var_index(name)));
            if (d.tag == Tag::Ref) names.try_emplace(d.val, name);
        }
        int fresh = 0;
        Answer answer;
        answer.proof_depth = depth;
        for (const auto& name : query_order_) {
            if (name[0] == '_') continue;
            std::unordered_set<std::int64_t> open;
            auto value = to_term(make_ref(var_index(name)), names, fresh, open);
            if (!value) return std::nullopt;
            if (value->is_var() && value->name() == name) continue;
            answer.bindings.emplace_back(name, std::move(*value));
        }
        return answer;
    }

private:
    struct Frame {
        Cell goal;
        int depth;
        std::int32_t next;
    };

    struct Choice {
        Cell goal;
        int depth;
        std::int32_t cont;
        const std::vector<std::uint32_t>* alts;
        std::size_t next_alt;
        std::size_t heap_top;
        std::size_t trail_top;
        std::size_t frames_top;
        int max_seen;
    };

    void compile(const Clause& clause)
    {
        CompiledClause cc;
        TermBuilder builder(atoms_, cc.cells);
        cc.head = builder.build_root(clause.head);
        for (const auto& goal : clause.body) cc.body.push_back(builder.build_root(goal));
        cc.first_arg = template_key(cc);
        std::int64_t name = 0;
        std::uint32_t arity = 0;
        functor_of(cc.head, cc.cells, name, arity);
        preds_[pred_key(name, arity)].push_back(static_cast<std::uint32_t>(clauses_.size()));
        clauses_.push_back(std::move(cc));
    }

    static void functor_of(const Cell& c, const std::vector<Cell>& cells, std::int64_t& name, std::uint32_t& arity)
    {
        if (c.tag == Tag::Str) {
            name = cells[static_cast<std::size_t>(c.val)].val;
            arity = cells[static_cast<std::size_t>(c.val)].arity;
        } else {
            name = c.val;
            arity = 0;
        }
    }

    static IndexKey key_of(const Cell& c, const std::vector<Cell>& cells)
    {
        switch (c.tag) {
        case Tag::Atom:
        case Tag::Int:
            return {true, c.tag, 0, c.val};
        case Tag::Str: {
            const Cell& f = cells[static_cast<std::size_t>(c.val)];
            return {true, Tag::Fun, f.arity, f.val};
        }
        default:
            return {};
        }
    }

    static IndexKey template_key(const CompiledClause& cc)
    {
        if (cc.head.tag != Tag::Str) return {};
        return key_of(cc.cells[static_cast<std::size_t>(cc.head.val) + 1], cc.cells);
    }

    IndexKey goal_key(const Cell& goal) const
    {
        if (goal.tag != Tag::Str) return {};
        return key_of(deref(heap_[static_cast<std::size_t>(goal.val) + 1]), heap_);
    }

    std::int64_t var_index(const std::string& name) const
    {
        for (const auto& [n, idx] : query_vars_)
            if (n == name) return idx;
        return -1;
    }

    Cell deref(Cell c) const
    {
        while (c.tag == Tag::Ref) {
            const Cell& target = heap_[static_cast<std::size_t>(c.val)];
            if (target.tag == Tag::Ref && target.val == c.val) return c;
            c = target;
        }
        return c;
    }

    void bind(std::int64_t idx, const Cell& value)
    {
        heap_[static_cast<std::size_t>(idx)] = value;
        trail_.push_back(idx);
    }

    bool unify(Cell a, Cell b)
    {
        std::vector<std::pair<Cell, Cell>> todo{{a, b}};
        while (!todo.empty()) {
            auto [x, y] = todo.back();
            todo.pop_back();
            x = deref(x);
            y = deref(y);
            if (x.tag == Tag::Ref && y.tag == Tag::Ref) {
                if (x.val == y.val) continue;
                if (x.val < y.val)
                    bind(y.val, x);
                else
                    bind(x.val, y);
                continue;
            }
            if (x.tag == Tag::Ref) {
                bind(x.val, y);
                continue;
            }
            if (y.tag == Tag::Ref) {
                bind(y.val, x);
                continue;
            }
            if (x.tag != y.tag) return false;
            if (x.tag != Tag::Str) {
                if (x.val != y.val) return false;
                continue;
            }
            if (x.val == y.val) continue;
            const Cell& fx = heap_[static_cast<std::size_t>(x.val)];
            const Cell& fy = heap_[static_cast<std::size_t>(y.val)];
            if (fx.val != fy.val || fx.arity != fy.arity) return false;
            for (std::uint32_t i = fx.arity; i >= 1; --i)
                todo.emplace_back(heap_[static_cast<std::size_t>(x.val) + i], heap_[static_cast<std::size_t>(y.val) + i]);
        }
        return true;
    }

    Cell relocate(Cell c, std::int64_t base) const
    {
        if (relocatable(c)) c.val += base;
        return c;
    }

    // Copies a clause onto the heap and unifies its head with the goal.
    bool resolve(const CompiledClause& cc, const Cell& goal, int depth)
    {
        auto base = static_cast<std::int64_t>(heap_.size());
        for (const Cell& c : cc.cells) heap_.push_back(relocate(c, base));
        if (!unify(goal, relocate(cc.head, base))) return false;
        for (auto it = cc.body.rbegin(); it != cc.body.rend(); ++it) {
            frames_.push_back({relocate(*it, base), depth + 1, cont_});
            cont_ = static_cast<std::int32_t>(frames_.size() - 1);
        }
        return true;
    }

    std::size_t next_candidate(const std::vector<std::uint32_t>& alts, std::size_t from, const IndexKey& key) const
    {
        for (std::size_t i = from; i < alts.size(); ++i)
            if (!clauses_[alts[i]].first_arg.clashes(key)) return i;
        return alts.size();
    }

    // Tries clauses alts[from..] for goal; pushes a choice point when more remain.
    bool try_clauses(const Cell& goal, int depth, const std::vector<std::uint32_t>& alts, std::size_t from)
    {
        IndexKey key = goal_key(goal);
        std::size_t i = next_candidate(alts, from, key);
        if (i == alts.size()) return false;
        std::size_t j = next_candidate(alts, i + 1, key);
        if (j < alts.size())
            choices_.push_back({goal, depth, cont_, &alts, j, heap_.size(), trail_.size(), frames_.size(), max_seen_});
        return resolve(clauses_[alts[i]], goal, depth);
    }

    bool backtrack()
    {
        while (!choices_.empty()) {
            Choice& c = choices_.back();
            for (std::size_t t = trail_.size(); t > c.trail_top; --t) {
                auto idx = trail_[t - 1];
                heap_[static_cast<std::size_t>(idx)] = make_ref(idx);
            }
            trail_.resize(c.trail_top);
            heap_.resize(c.heap_top);
            frames_.resize(c.frames_top);
            max_seen_ = c.max_seen;
            cont_ = c.cont;

            Cell goal = c.goal;
            int depth = c.depth;
            const auto& alts = *c.alts;
            std::size_t i = c.next_alt;
            std::size_t j = next_candidate(alts, i + 1, goal_key(goal));
            if (j < alts.size())
                c.next_alt = j;
            else
                choices_.pop_back();
            if (resolve(clauses_[alts[i]], goal, depth)) return true;
        }
        return false;
    }

    [[noreturn]] void raise(EngineErrorKind kind, const std::string& message) const
    {
        throw EngineError(kind, message);
    }

    std::string describe(Cell c) const
    {
        std::unordered_map<std::int64_t, std::string> names;
        int fresh = 0;
        std::unordered_set<std::int64_t> open;
        auto t = to_term(c, names, fresh, open);
        return t ? format_term(*t) : std::string("<cyclic>");
    }

    std::int64_t eval(Cell c) const
    {
        c = deref(c);
        switch (c.tag) {
        case Tag::Int:
            return c.val;
        case Tag::Ref:
            raise(EngineErrorKind::instantiation_error, "unbound variable in arithmetic expression");
        case Tag::Atom:
            raise(EngineErrorKind::type_error, "evaluable expected, got " + describe(c));
        case Tag::Str:
            break;
        default:
            raise(EngineErrorKind::type_error, "evaluable expected");
        }
        const Cell& f = heap_[static_cast<std::size_t>(c.val)];
        auto arg = [&](std::uint32_t i) { return heap_[static_cast<std::size_t>(c.val) + i]; };
        std::int64_t r = 0;
        if (f.arity == 1 && f.val == minus_) {
            std::int64_t a = eval(arg(1));
            if (__builtin_sub_overflow(std::int64_t{0}, a, &r)) overflow();
            return r;
        }
        if (f.arity == 2) {
            std::int64_t a = eval(arg(1));
            std::int64_t b = eval(arg(2));
            if (f.val == plus_) {
                if (__builtin_add_overflow(a, b, &r)) overflow();
                return r;
            }
            if (f.val == minus_) {
                if (__builtin_sub_overflow(a, b, &r)) overflow();
                return r;
            }
            if (f.val == times_) {
                if (__builtin_mul_overflow(a, b, &r)) overflow();
                return r;
            }
            if (f.val == intdiv_) {
                if (b == 0) raise(EngineErrorKind::evaluation_error, "zero_divisor");
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow();
                return a / b;
            }
        }
        raise(EngineErrorKind::type_error,
              "evaluable expected, got " + atoms_.name(f.val) + "/" + std::to_string(f.arity));
    }

    [[noreturn]] void overflow() const { raise(EngineErrorKind::evaluation_error, "int_overflow"); }

    bool is_proper_list(Cell c) const
    {
        while (true) {
            c = deref(c);
            if (c.tag == Tag::Atom) return c.val == nil_;
            if (c.tag != Tag::Str) return false;
            const Cell& f = heap_[static_cast<std::size_t>(c.val)];
            if (f.val != dot_ || f.arity != 2) return false;
            c = heap_[static_cast<std::size_t>(c.val) + 2];
        }
    }

    bool call_builtin(Builtin b, const Cell& goal, int depth)
    {
        auto arg = [&](std::uint32_t i) { return heap_[static_cast<std::size_t>(goal.val) + i]; };
        switch (b) {
        case Builtin::conj:
            frames_.push_back({arg(2), depth, cont_});
            frames_.push_back({arg(1), depth, static_cast<std::int32_t>(frames_.size() - 1)});
            cont_ = static_cast<std::int32_t>(frames_.size() - 1);
            return true;
        case Builtin::true_:
            return true;
        case Builtin::fail:
            return false;
        case Builtin::unify:
            return unify(arg(1), arg(2));
        case Builtin::is:
            return unify(arg(1), make_int(eval(arg(2))));
        case Builtin::lt: return eval(arg(1)) < eval(arg(2));
        case Builtin::gt: return eval(arg(1)) > eval(arg(2));
        case Builtin::le: return eval(arg(1)) <= eval(arg(2));
        case Builtin::ge: return eval(arg(1)) >= eval(arg(2));
        case Builtin::eq: return eval(arg(1)) == eval(arg(2));
        case Builtin::ne: return eval(arg(1)) != eval(arg(2));
        case Builtin::var: return deref(arg(1)).tag == Tag::Ref;
        case Builtin::nonvar: return deref(arg(1)).tag != Tag::Ref;
        case Builtin::list: return is_proper_list(arg(1));
        case Builtin::none: break;
        }
        return false;
    }

    // Executes the next goal. Returns false on failure.
    bool step()
    {
        Frame f = frames_[static_cast<std::size_t>(cont_)];
        cont_ = f.next;
        if (++steps_ > budget_.max_steps) {
            steps_exceeded_ = true;
            return false;
        }
        if ((steps_ & 0x3ff) == 0 && stop_.stop_requested())
            raise(EngineErrorKind::cancelled, "evaluation cancelled");
        if (f.depth > limit_) {
            cutoff_ = true;
            return false;
        }
        if (f.depth > max_seen_) max_seen_ = f.depth;

        Cell g = deref(f.goal);
        std::int64_t name = 0;
        std::uint32_t arity = 0;
        switch (g.tag) {
        case Tag::Ref:
            raise(EngineErrorKind::instantiation_error, "unbound goal");
        case Tag::Int:
            raise(EngineErrorKind::type_error, "callable expected, got " + std::to_string(g.val));
        case Tag::Atom:
            name = g.val;
            break;
        case Tag::Str:
            name = heap_[static_cast<std::size_t>(g.val)].val;
            arity = heap_[static_cast<std::size_t>(g.val)].arity;
            break;
        default:
            raise(EngineErrorKind::type_error, "callable expected");
        }
        std::uint64_t key = pred_key(name, arity);
        if (auto b = builtins_.find(key); b != builtins_.end()) return call_builtin(b->second, g, f.depth);
        auto p = preds_.find(key);
        if (p == preds_.end()) return false;
        return try_clauses(g, f.depth, p->second, 0);
    }

    std::optional<Term> to_term(Cell c, std::unordered_map<std::int64_t, std::string>& names, int& fresh,
                                std::unordered_set<std::int64_t>& open) const
    {
        c = deref(c);
        switch (c.tag) {
        case Tag::Ref: {
            auto [it, inserted] = names.try_emplace(c.val, std::string());
            if (inserted) it->second = "_" + std::to_string(++fresh);
            return Term::var(it->second);
        }
        case Tag::Atom:
            return Term::atom(atoms_.name(c.val));
        case Tag::Int:
            return Term::integer(c.val);
        case Tag::Str: {
            if (!open.insert(c.val).second) return std::nullopt;
            const Cell& f = heap_[static_cast<std::size_t>(c.val)];
            std::vector<Term> args;
            args.reserve(f.arity);
            for (std::uint32_t i = 1; i <= f.arity; ++i) {
                auto a = to_term(heap_[static_cast<std::size_t>(c.val) + i], names, fresh, open);
                if (!a) return std::nullopt;
                args.push_back(std::move(*a));
            }
            open.erase(c.val);
            return Term::compound(atoms_.name(f.val), std::move(args));
        }
        default:
            return std::nullopt;
        }
    }

    Budget budget_;
    std::stop_token stop_;
    AtomTable atoms_;
    std::unordered_map<std::uint64_t, Builtin> builtins_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> preds_;
    std::vector<CompiledClause> clauses_;
    std::int64_t nil_ = 0, dot_ = 0, plus_ = 0, minus_ = 0, times_ = 0, intdiv_ = 0;

    std::vector<Cell> heap_;
    std::vector<std::int64_t> trail_;
    std::vector<Frame> frames_;
    std::vector<Choice> choices_;
    std::vector<std::pair<std::string, std::int64_t>> query_vars_;
    std::vector<std::string> query_order_;
    std::int32_t cont_ = -1;
    int limit_ = 0;
    int max_seen_ = 0;
    bool cutoff_ = false;
    bool steps_exceeded_ = false;
    std::int64_t steps_ = 0;
};

} // namespace

SolveResult solve(const Program& program, const Term& query, const Budget& budget, std::stop_token stop)
{
    validate(budget);
    if (query.is_var()) throw EngineError(EngineErrorKind::instantiation_error, "unbound query");
    if (!query.is_callable())
        throw EngineError(EngineErrorKind::type_error, "callable expected, got " + format_term(query));

    Machine machine(program, budget, std::move(stop));
    SolveResult result;
    std::unordered_set<std::string> seen;
    bool stopped = false;

    auto on_answer = [&](int depth) {
        auto answer = machine.extract_answer(depth);
        if (!answer) return true;
        if (program.fair_search && !seen.insert(answer->key()).second) return true;
        result.answers.push_back(std::move(*answer));
        if (static_cast<int>(result.answers.size()) >= budget.max_answers) {
            stopped = true;
            return false;
        }
        return true;
    };

    if (program.fair_search) {
        for (int limit = 1; limit <= budget.max_depth; ++limit) {
            machine.run(query, limit, on_answer);
            if (stopped) {
                result.more = machine.has_choices() || (machine.cutoff() && limit < budget.max_depth);
                break;
            }
            if (machine.steps_exceeded()) {
                result.budget_hit = true;
                break;
            }
            if (!machine.cutoff()) break;
            if (limit == budget.max_depth) result.budget_hit = true;
        }
    } else {
        machine.run(query, std::numeric_limits<int>::max(), on_answer);
        if (stopped)
            result.more = machine.has_choices();
        else
            result.budget_hit = machine.steps_exceeded();
    }
    result.steps = machine.steps();

    if (result.answers.empty() && result.budget_hit) {
        std::string limits = std::to_string(budget.max_steps) + " steps";
        if (program.fair_search) limits = "depth " + std::to_string(budget.max_depth) + " and " + limits;
        throw EngineError(EngineErrorKind::budget_exhausted, "no answer within " + limits);
    }
    return result;
}

} // namespace ald::logic
