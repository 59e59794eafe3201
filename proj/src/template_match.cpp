#include <algorithm>
#include <functional>
#include <set>

#include "ski/error.hpp"
#include "ski/template.hpp"

namespace ski {

namespace {

using Path = std::vector<std::uint32_t>;

std::vector<std::vector<int>> all_chains(const Template& t) {
  std::vector<std::vector<int>> out;
  for (std::size_t g = 0; g < t.groups.size(); ++g) out.push_back(t.chain(static_cast<int>(g)));
  return out;
}

// Tracks the current index of every open indexed union and maps variables
// to binding keys.
class Indexer {
 public:
  explicit Indexer(const Template& t) : t_(t), chains_(all_chains(t)), cur_(t.groups.size(), 0) {}

  Path path(int scope) const {
    Path p;
    if (scope < 0) return p;
    for (int g : chains_[static_cast<std::size_t>(scope)]) p.push_back(cur_[static_cast<std::size_t>(g)]);
    return p;
  }
  VarKey evar_key(int v) const { return {v, path(t_.evars[static_cast<std::size_t>(v)].scope)}; }
  VarKey svar_key(int v) const { return {v, path(t_.svars[static_cast<std::size_t>(v)].scope)}; }
  VarKey arity_key(int g) const { return {g, path(t_.groups[static_cast<std::size_t>(g)].parent)}; }
  void set_index(int g, std::uint32_t i) { cur_[static_cast<std::size_t>(g)] = i; }

 protected:
  const Template& t_;
  std::vector<std::vector<int>> chains_;
  std::vector<std::uint32_t> cur_;
};

struct Comp {
  enum Kind { E, V, F } kind;
  PatPtr elem;
  int id = -1;
  SetPtr body;
};

std::vector<Comp> components(const SetPtr& s) {
  std::vector<Comp> out;
  std::function<void(const SetPtr&)> add = [&](const SetPtr& x) {
    switch (x->kind) {
      case TSet::Kind::Union:
        for (const auto& q : x->parts) add(q);
        break;
      case TSet::Kind::Explicit:
        for (const auto& e : x->elems) out.push_back({Comp::E, e, -1, nullptr});
        break;
      case TSet::Kind::Singleton: out.push_back({Comp::E, TPat::evar(x->var), -1, nullptr}); break;
      case TSet::Kind::SVar: out.push_back({Comp::V, nullptr, x->var, nullptr}); break;
      case TSet::Kind::Bigcup: out.push_back({Comp::F, nullptr, x->group, x->body}); break;
    }
  };
  add(s);
  return out;
}

using Mask = std::uint64_t;

GSet from_mask(const GSet& target, Mask m) {
  std::vector<GElem> xs;
  for (std::size_t j = 0; j < target.size(); ++j)
    if (m >> j & 1) xs.push_back(target[j]);
  return GSet(std::move(xs));
}

// ---------------------------------------------------------------------------
// Matching: backtracking over bindings, continuation style.

class Matcher : public Indexer {
 public:
  Matcher(const Template& t, const MatchOptions& o) : Indexer(t), opts_(o) {}

  Binding b;

  void pat(const PatPtr& p, const GElem& e, const std::function<void()>& k) {
    switch (p->kind) {
      case TPat::Kind::EVar: {
        const VarKey key = evar_key(p->var);
        auto it = b.elems.find(key);
        if (it != b.elems.end()) {
          if (it->second == e) k();
          return;
        }
        it = b.elems.emplace(key, e).first;
        k();
        b.elems.erase(it);
        return;
      }
      case TPat::Kind::Nat:
        if (e.is_nat() && e.nat_value() == p->nat) k();
        return;
      case TPat::Kind::Arrow:
        if (!spine_fits(p, e)) return;
        pat(p->elem, e.consequent(), [&] { set_exact(p->set, e.antecedent(), k); });
        return;
    }
  }

  // Cheap necessary condition: the consequent chains agree in shape.
  static bool spine_fits(const PatPtr& p, const GElem& e) {
    const TPat* q = p.get();
    GElem x = e;
    while (q->kind == TPat::Kind::Arrow) {
      if (!x.is_arrow()) return false;
      q = q->elem.get();
      x = x.consequent();
    }
    return q->kind == TPat::Kind::EVar || (x.is_nat() && x.nat_value() == q->nat);
  }

  void set_exact(const SetPtr& s, const GSet& target, const std::function<void()>& k) {
    if (target.size() > 62) throw PreconditionError("set too large to match");
    const Mask full = target.size() == 0 ? 0 : (Mask{1} << target.size()) - 1;
    set_sub(s, target, [&](Mask m) {
      if (m == full) k();
    });
  }

  // Every way the set pattern instantiates to a subset of target; reports
  // the subset as a bitmask.
  void set_sub(const SetPtr& s, const GSet& target, const std::function<void(Mask)>& k) {
    const auto comps = components(s);
    cover(comps, 0, 0, target, k);
  }

 private:
  void cover(const std::vector<Comp>& cs, std::size_t i, Mask acc, const GSet& target,
             const std::function<void(Mask)>& k) {
    if (i == cs.size()) return k(acc);
    const Comp& c = cs[i];
    auto next = [&](Mask m) { cover(cs, i + 1, acc | m, target, k); };
    switch (c.kind) {
      case Comp::E:
        for (std::size_t j = 0; j < target.size(); ++j) pat(c.elem, target[j], [&] { next(Mask{1} << j); });
        return;
      case Comp::V: {
        const VarKey key = svar_key(c.id);
        auto it = b.sets.find(key);
        if (it != b.sets.end()) {
          Mask m = 0;
          for (const auto& x : it->second) {
            auto pos = std::lower_bound(target.begin(), target.end(), x);
            if (pos == target.end() || *pos != x) return;
            m |= Mask{1} << (pos - target.begin());
          }
          return next(m);
        }
        const Mask full = target.size() == 0 ? 0 : (Mask{1} << target.size()) - 1;
        for (Mask m = 0;; m = (m - full) & full) {  // all submasks in increasing order
          it = b.sets.emplace(key, from_mask(target, m)).first;
          next(m);
          b.sets.erase(it);
          if (m == full) break;
        }
        return;
      }
      case Comp::F: {
        const VarKey key = arity_key(c.id);
        auto it = b.arities.find(key);
        if (it != b.arities.end()) return indices(c, 0, it->second, 0, 0, false, target, next);
        const std::size_t lo = t_.groups[static_cast<std::size_t>(c.id)].min;
        const std::size_t hi = target.size() + opts_.arity_slack;
        for (std::size_t n = lo; n <= hi; ++n) {
          it = b.arities.emplace(key, n).first;
          // Nothing under this group is bound yet, so its indices are
          // interchangeable: only nondecreasing cover masks are tried.
          indices(c, 0, n, 0, 0, true, target, next);
          b.arities.erase(it);
        }
        return;
      }
    }
  }

  void indices(const Comp& c, std::size_t i, std::size_t n, Mask acc, Mask prev, bool ordered,
               const GSet& target, const std::function<void(Mask)>& k) {
    if (i == n) return k(acc);
    const std::uint32_t saved = cur_[static_cast<std::size_t>(c.id)];
    set_index(c.id, static_cast<std::uint32_t>(i));
    set_sub(c.body, target, [&](Mask m) {
      if (ordered && m < prev) return;
      set_index(c.id, static_cast<std::uint32_t>(i + 1));
      indices(c, i + 1, n, acc | m, m, ordered, target, k);
      set_index(c.id, static_cast<std::uint32_t>(i));
    });
    set_index(c.id, saved);
  }

  MatchOptions opts_;
};

// ---------------------------------------------------------------------------
// Canonical bindings: within each group instance, index subtrees are sorted
// and duplicates removed, so the representative is unique.

std::string key_text(const Path& p, std::size_t from) {
  std::string s;
  for (std::size_t i = from; i < p.size(); ++i) s += std::to_string(p[i]) + ".";
  return s;
}

Binding canonicalize(const Template& t, Binding b) {
  const auto chains = all_chains(t);
  auto scope_chain = [&](int scope) -> const std::vector<int>& {
    static const std::vector<int> none;
    return scope < 0 ? none : chains[static_cast<std::size_t>(scope)];
  };
  std::vector<int> order;
  for (std::size_t g = 0; g < t.groups.size(); ++g) order.push_back(static_cast<int>(g));
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
    return chains[static_cast<std::size_t>(a)].size() > chains[static_cast<std::size_t>(c)].size();
  });

  for (int g : order) {
    const std::size_t d = chains[static_cast<std::size_t>(g)].size() - 1;
    std::vector<std::pair<Path, std::size_t>> instances;
    for (const auto& [key, n] : b.arities)
      if (key.id == g) instances.emplace_back(key.path, n);
    for (const auto& [prefix, n] : instances) {
      auto slot = [&](const std::vector<int>& chain, const Path& path) -> std::optional<std::uint32_t> {
        if (chain.size() <= d || chain[d] != g) return std::nullopt;
        if (!std::equal(prefix.begin(), prefix.end(), path.begin())) return std::nullopt;
        return path[d];
      };
      std::vector<std::string> sig(n);
      for (const auto& [key, v] : b.elems)
        if (auto i = slot(scope_chain(t.evars[static_cast<std::size_t>(key.id)].scope), key.path))
          sig[*i] += "e" + std::to_string(key.id) + ":" + key_text(key.path, d + 1) + "=" + to_text(v) + ";";
      for (const auto& [key, v] : b.sets)
        if (auto i = slot(scope_chain(t.svars[static_cast<std::size_t>(key.id)].scope), key.path))
          sig[*i] += "s" + std::to_string(key.id) + ":" + key_text(key.path, d + 1) + "=" + to_text(v) + ";";
      for (const auto& [key, v] : b.arities)
        if (auto i = slot(scope_chain(t.groups[static_cast<std::size_t>(key.id)].parent), key.path))
          sig[*i] += "a" + std::to_string(key.id) + ":" + key_text(key.path, d + 1) + "=" + std::to_string(v) + ";";
      std::vector<std::string> distinct = sig;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      auto renumber = [&](const std::vector<int>& chain, VarKey key) {
        if (auto i = slot(chain, key.path)) {
          key.path[d] = static_cast<std::uint32_t>(
              std::lower_bound(distinct.begin(), distinct.end(), sig[*i]) - distinct.begin());
        }
        return key;
      };
      Binding nb;
      for (const auto& [key, v] : b.elems)
        nb.elems.emplace(renumber(scope_chain(t.evars[static_cast<std::size_t>(key.id)].scope), key), v);
      for (const auto& [key, v] : b.sets)
        nb.sets.emplace(renumber(scope_chain(t.svars[static_cast<std::size_t>(key.id)].scope), key), v);
      for (const auto& [key, v] : b.arities)
        nb.arities.emplace(renumber(scope_chain(t.groups[static_cast<std::size_t>(key.id)].parent), key), v);
      nb.arities[VarKey{g, prefix}] = distinct.size();
      b = std::move(nb);
    }
  }
  return b;
}

std::string binding_key(const Binding& b) {
  std::string s;
  for (const auto& [k, v] : b.elems) s += "e" + std::to_string(k.id) + ":" + key_text(k.path, 0) + to_text(v) + ";";
  for (const auto& [k, v] : b.sets) s += "s" + std::to_string(k.id) + ":" + key_text(k.path, 0) + to_text(v) + ";";
  for (const auto& [k, v] : b.arities)
    s += "a" + std::to_string(k.id) + ":" + key_text(k.path, 0) + std::to_string(v) + ";";
  return s;
}

// ---------------------------------------------------------------------------
// Instantiation and generation

class Builder : public Indexer {
 public:
  Builder(const Template& t, const Binding& b) : Indexer(t), b_(b) {}

  GElem pat(const PatPtr& p) {
    switch (p->kind) {
      case TPat::Kind::EVar: return lookup(b_.elems, evar_key(p->var), "element variable");
      case TPat::Kind::Nat: return GElem::nat(p->nat);
      case TPat::Kind::Arrow: return GElem::arrow(set(p->set), pat(p->elem));
    }
    throw PreconditionError("bad pattern");
  }

  GSet set(const SetPtr& s) {
    switch (s->kind) {
      case TSet::Kind::SVar: return lookup(b_.sets, svar_key(s->var), "set variable");
      case TSet::Kind::Singleton: return GSet{lookup(b_.elems, evar_key(s->var), "element variable")};
      case TSet::Kind::Explicit: {
        std::vector<GElem> xs;
        for (const auto& e : s->elems) xs.push_back(pat(e));
        return GSet(std::move(xs));
      }
      case TSet::Kind::Bigcup: {
        const std::size_t n = lookup(b_.arities, arity_key(s->group), "arity");
        GSet acc;
        for (std::size_t i = 0; i < n; ++i) {
          set_index(s->group, static_cast<std::uint32_t>(i));
          acc = acc.unite(set(s->body));
        }
        return acc;
      }
      case TSet::Kind::Union: {
        GSet acc;
        for (const auto& q : s->parts) acc = acc.unite(set(q));
        return acc;
      }
    }
    throw PreconditionError("bad set pattern");
  }

 private:
  template <class Map>
  static typename Map::mapped_type lookup(const Map& m, const VarKey& k, const char* what) {
    auto it = m.find(k);
    if (it == m.end()) throw IncompleteBinding(std::string("unbound ") + what);
    return it->second;
  }
  const Binding& b_;
};

// Generates every instantiation whose elements stay within the bounded
// universe; variables already bound keep their value.
class Generator : public Indexer {
 public:
  Generator(const Template& t, const Universe& u, Binding b) : Indexer(t), b(std::move(b)), u_(u) {}

  Binding b;
  bool used_free = false;

  void pat(const PatPtr& p, std::size_t budget, const std::function<void(const GElem&)>& k) {
    switch (p->kind) {
      case TPat::Kind::EVar: {
        const VarKey key = evar_key(p->var);
        auto it = b.elems.find(key);
        if (it != b.elems.end()) {
          if (it->second.rank() <= budget) k(it->second);
          return;
        }
        used_free = true;
        for (const auto& x : u_.upto(budget)) {
          it = b.elems.emplace(key, x).first;
          k(x);
          b.elems.erase(it);
        }
        return;
      }
      case TPat::Kind::Nat:
        if (p->nat <= u_.bounds().max_nat) k(GElem::nat(p->nat));
        return;
      case TPat::Kind::Arrow:
        if (budget == 0) return;
        set(p->set, budget - 1, [&](const GSet& a) {
          pat(p->elem, budget - 1, [&](const GElem& c) { k(GElem::arrow(a, c)); });
        });
        return;
    }
  }

  void set(const SetPtr& s, std::size_t budget, const std::function<void(const GSet&)>& k) {
    const auto comps = components(s);
    cover(comps, 0, GSet{}, budget, k);
  }

 private:
  void cover(const std::vector<Comp>& cs, std::size_t i, const GSet& acc, std::size_t budget,
             const std::function<void(const GSet&)>& k) {
    if (acc.size() > u_.bounds().max_set_size) return;
    if (i == cs.size()) return k(acc);
    const Comp& c = cs[i];
    auto next = [&](const GSet& part) { cover(cs, i + 1, acc.unite(part), budget, k); };
    switch (c.kind) {
      case Comp::E:
        pat(c.elem, budget, [&](const GElem& e) { next(GSet{e}); });
        return;
      case Comp::V: {
        const VarKey key = svar_key(c.id);
        auto it = b.sets.find(key);
        if (it != b.sets.end()) {
          for (const auto& x : it->second)
            if (x.rank() > budget) return;
          return next(it->second);
        }
        used_free = true;
        for (const auto& sub : subsets_upto(u_.upto(budget), u_.bounds().max_set_size)) {
          it = b.sets.emplace(key, sub).first;
          next(sub);
          b.sets.erase(it);
        }
        return;
      }
      case Comp::F: {
        const VarKey key = arity_key(c.id);
        auto it = b.arities.find(key);
        if (it != b.arities.end()) return indices(c, 0, it->second, GSet{}, budget, next);
        used_free = true;
        const std::size_t lo = t_.groups[static_cast<std::size_t>(c.id)].min;
        for (std::size_t n = lo; n <= u_.bounds().max_arity; ++n) {
          it = b.arities.emplace(key, n).first;
          indices(c, 0, n, GSet{}, budget, next);
          b.arities.erase(it);
        }
        return;
      }
    }
  }

  void indices(const Comp& c, std::size_t i, std::size_t n, const GSet& acc, std::size_t budget,
               const std::function<void(const GSet&)>& k) {
    if (acc.size() > u_.bounds().max_set_size) return;
    if (i == n) return k(acc);
    set_index(c.id, static_cast<std::uint32_t>(i));
    set(c.body, budget, [&](const GSet& part) {
      indices(c, i + 1, n, acc.unite(part), budget, k);
      set_index(c.id, static_cast<std::uint32_t>(i));
    });
  }

  const Universe& u_;
};

}  // namespace

std::vector<Binding> match_element(const Template& tpl, const GElem& e, const MatchOptions& opts) {
  Matcher m(tpl, opts);
  std::set<std::string> seen;
  std::vector<Binding> out;
  m.pat(tpl.root, e, [&] {
    if (out.size() >= opts.max_results) return;
    Binding c = canonicalize(tpl, m.b);
    if (!seen.insert(binding_key(c)).second) return;
    if (instantiate(tpl, c) != e) return;
    out.push_back(std::move(c));
  });
  return out;
}

bool member_via_template(const Template& tpl, const GElem& e, const MatchOptions& opts) {
  MatchOptions one = opts;
  one.max_results = 1;
  return !match_element(tpl, e, one).empty();
}

bool member_via_template(const Term& t, const GElem& e, const MatchOptions& opts) {
  try {
    return member_via_template(template_of(t), e, opts);
  } catch (const UnificationFailure&) {
    return false;  // empty denotation
  }
}

GElem instantiate(const Template& tpl, const Binding& b) { return Builder(tpl, b).pat(tpl.root); }

GSet enumerate_template(const Template& tpl, const Bounds& bounds) {
  Universe u(bounds);
  Generator g(tpl, u, Binding{});
  std::vector<GElem> out;
  g.pat(tpl.root, bounds.max_rank, [&](const GElem& e) {
    if (u.contains(e)) out.push_back(e);
  });
  return GSet(std::move(out));
}

BoundedSet template_apply(const Template& tpl, const GSet& arg, const Bounds& bounds) {
  const auto& root = tpl.root;
  Universe u(bounds);
  if (root->kind == TPat::Kind::Nat) return {};
  if (root->kind == TPat::Kind::EVar) return {GSet(u.upto(bounds.max_rank)), true};
  if (arg.size() > 20) throw PreconditionError("argument set too large for template application");

  BoundedSet out;
  std::vector<GElem> found;
  const Mask full = arg.size() == 0 ? 0 : (Mask{1} << arg.size()) - 1;
  for (Mask sub = 0;; sub = (sub - full) & full) {
    const GSet alpha = from_mask(arg, sub);
    Matcher m(tpl, MatchOptions{});
    std::set<std::string> seen;
    m.set_exact(root->set, alpha, [&] {
      if (!seen.insert(binding_key(canonicalize(tpl, m.b))).second) return;
      Generator g(tpl, u, m.b);
      g.pat(root->elem, bounds.max_rank, [&](const GElem& e) {
        if (u.contains(e)) {
          found.push_back(e);
        } else {
          out.truncated = true;
        }
      });
      out.truncated = out.truncated || g.used_free;
    });
    if (sub == full) break;
  }
  out.set = GSet(std::move(found));
  return out;
}

std::string to_text(const Template& tpl, const Binding& b) {
  auto path_text = [](const Path& p) {
    if (p.empty()) return std::string();
    std::string s = "_";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i] + 1);
    return s;
  };
  std::vector<std::string> parts;
  for (const auto& [k, v] : b.arities)
    parts.push_back(tpl.groups[static_cast<std::size_t>(k.id)].name + path_text(k.path) + " = " +
                    std::to_string(v));
  for (const auto& [k, v] : b.elems)
    parts.push_back(tpl.evars[static_cast<std::size_t>(k.id)].name + path_text(k.path) + " = " + to_text(v));
  for (const auto& [k, v] : b.sets)
    parts.push_back(tpl.svars[static_cast<std::size_t>(k.id)].name + path_text(k.path) + " = " + to_text(v));
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

}  // namespace ski
