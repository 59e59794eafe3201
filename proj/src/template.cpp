#include "ski/template.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>

#include "ski/error.hpp"

namespace ski {

// ---------------------------------------------------------------------------
// Node construction. Set constructors normalize: unions are flattened, empty
// parts dropped and explicit parts merged; duplicate members collapse.

PatPtr TPat::evar(int id) {
  return std::make_shared<TPat>(TPat{Kind::EVar, id, 0, nullptr, nullptr});
}
PatPtr TPat::natural(std::uint64_t k) {
  return std::make_shared<TPat>(TPat{Kind::Nat, -1, k, nullptr, nullptr});
}
PatPtr TPat::arrow(SetPtr s, PatPtr e) {
  return std::make_shared<TPat>(TPat{Kind::Arrow, -1, 0, std::move(s), std::move(e)});
}

SetPtr TSet::svar(int id) {
  auto s = std::make_shared<TSet>();
  s->kind = Kind::SVar;
  s->var = id;
  return s;
}

SetPtr TSet::singleton(int evar) {
  auto s = std::make_shared<TSet>();
  s->kind = Kind::Singleton;
  s->var = evar;
  return s;
}

SetPtr TSet::explicit_set(std::vector<PatPtr> elems) {
  std::vector<PatPtr> uniq;
  for (auto& e : elems) {
    bool dup = false;
    for (const auto& u : uniq) dup = dup || pat_equal(u, e);
    if (!dup) uniq.push_back(std::move(e));
  }
  // {t} for a bare element variable keeps its singleton form.
  if (uniq.size() == 1 && uniq[0]->kind == TPat::Kind::EVar) return singleton(uniq[0]->var);
  auto s = std::make_shared<TSet>();
  s->kind = Kind::Explicit;
  s->elems = std::move(uniq);
  return s;
}

namespace {

bool is_empty_set(const SetPtr& s) {
  return s->kind == TSet::Kind::Explicit && s->elems.empty();
}

}  // namespace

SetPtr TSet::bigcup(int group, SetPtr body) {
  if (is_empty_set(body)) return body;
  auto s = std::make_shared<TSet>();
  s->kind = Kind::Bigcup;
  s->group = group;
  s->body = std::move(body);
  return s;
}

SetPtr TSet::set_union(std::vector<SetPtr> parts) {
  std::vector<SetPtr> flat;
  std::vector<PatPtr> explicit_elems;
  std::function<void(const SetPtr&)> add = [&](const SetPtr& p) {
    switch (p->kind) {
      case Kind::Union:
        for (const auto& q : p->parts) add(q);
        return;
      case Kind::Explicit:
        for (const auto& e : p->elems) explicit_elems.push_back(e);
        return;
      case Kind::Singleton:
        explicit_elems.push_back(TPat::evar(p->var));
        return;
      default:
        for (const auto& f : flat)
          if (set_equal(f, p)) return;
        flat.push_back(p);
    }
  };
  for (const auto& p : parts) add(p);
  if (!explicit_elems.empty()) flat.insert(flat.begin(), explicit_set(std::move(explicit_elems)));
  if (flat.empty()) return explicit_set({});
  if (flat.size() == 1) return flat[0];
  auto s = std::make_shared<TSet>();
  s->kind = Kind::Union;
  s->parts = std::move(flat);
  return s;
}

bool pat_equal(const PatPtr& a, const PatPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TPat::Kind::EVar: return a->var == b->var;
    case TPat::Kind::Nat: return a->nat == b->nat;
    case TPat::Kind::Arrow: return set_equal(a->set, b->set) && pat_equal(a->elem, b->elem);
  }
  return false;
}

bool set_equal(const SetPtr& a, const SetPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TSet::Kind::SVar:
    case TSet::Kind::Singleton: return a->var == b->var;
    case TSet::Kind::Explicit:
      if (a->elems.size() != b->elems.size()) return false;
      for (std::size_t i = 0; i < a->elems.size(); ++i)
        if (!pat_equal(a->elems[i], b->elems[i])) return false;
      return true;
    case TSet::Kind::Bigcup: return a->group == b->group && set_equal(a->body, b->body);
    case TSet::Kind::Union:
      if (a->parts.size() != b->parts.size()) return false;
      for (std::size_t i = 0; i < a->parts.size(); ++i)
        if (!set_equal(a->parts[i], b->parts[i])) return false;
      return true;
  }
  return false;
}

std::vector<int> Template::chain(int g) const {
  std::vector<int> out;
  for (; g >= 0; g = groups[static_cast<std::size_t>(g)].parent) out.push_back(g);
  std::reverse(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Generic rewriting

namespace {

struct Rewrite {
  std::function<PatPtr(int)> evar;                 // replacement or null
  std::function<SetPtr(int)> svar;                 // replacement or null
  std::function<SetPtr(int, const SetPtr&)> bigcup;  // (group, rewritten body)
};

SetPtr rewrite_set(const SetPtr& s, const Rewrite& rw);

PatPtr rewrite_pat(const PatPtr& p, const Rewrite& rw) {
  switch (p->kind) {
    case TPat::Kind::EVar:
      if (rw.evar)
        if (auto r = rw.evar(p->var)) return r;
      return p;
    case TPat::Kind::Nat: return p;
    case TPat::Kind::Arrow: {
      auto s = rewrite_set(p->set, rw);
      auto e = rewrite_pat(p->elem, rw);
      if (s == p->set && e == p->elem) return p;
      return TPat::arrow(std::move(s), std::move(e));
    }
  }
  return p;
}

SetPtr rewrite_set(const SetPtr& s, const Rewrite& rw) {
  switch (s->kind) {
    case TSet::Kind::SVar:
      if (rw.svar)
        if (auto r = rw.svar(s->var)) return r;
      return s;
    case TSet::Kind::Singleton:
      if (rw.evar)
        if (auto r = rw.evar(s->var)) return TSet::explicit_set({r});
      return s;
    case TSet::Kind::Explicit: {
      std::vector<PatPtr> xs;
      bool changed = false;
      for (const auto& e : s->elems) {
        xs.push_back(rewrite_pat(e, rw));
        changed = changed || xs.back() != e;
      }
      return changed ? TSet::explicit_set(std::move(xs)) : s;
    }
    case TSet::Kind::Bigcup: {
      auto body = rewrite_set(s->body, rw);
      if (rw.bigcup)
        if (auto r = rw.bigcup(s->group, body)) return r;
      return body == s->body ? s : TSet::bigcup(s->group, std::move(body));
    }
    case TSet::Kind::Union: {
      std::vector<SetPtr> ps;
      bool changed = false;
      for (const auto& q : s->parts) {
        ps.push_back(rewrite_set(q, rw));
        changed = changed || ps.back() != q;
      }
      return changed ? TSet::set_union(std::move(ps)) : s;
    }
  }
  return s;
}

struct Occurrences {
  std::set<int> evars, svars, groups;
};

void occurrences(const SetPtr& s, Occurrences& o);

void occurrences(const PatPtr& p, Occurrences& o) {
  switch (p->kind) {
    case TPat::Kind::EVar: o.evars.insert(p->var); break;
    case TPat::Kind::Nat: break;
    case TPat::Kind::Arrow:
      occurrences(p->set, o);
      occurrences(p->elem, o);
      break;
  }
}

void occurrences(const SetPtr& s, Occurrences& o) {
  switch (s->kind) {
    case TSet::Kind::SVar: o.svars.insert(s->var); break;
    case TSet::Kind::Singleton: o.evars.insert(s->var); break;
    case TSet::Kind::Explicit:
      for (const auto& e : s->elems) occurrences(e, o);
      break;
    case TSet::Kind::Bigcup:
      o.groups.insert(s->group);
      occurrences(s->body, o);
      break;
    case TSet::Kind::Union:
      for (const auto& q : s->parts) occurrences(q, o);
      break;
  }
}

// A {t} counts only when t is not indexed by an enclosing indexed union:
// {r_i}_n is a family of n members, not a singleton.
struct SingletonScan {
  const Template& tpl;
  std::vector<int> enclosing;

  bool pat(const PatPtr& p) { return p->kind == TPat::Kind::Arrow && (set(p->set) || pat(p->elem)); }

  bool set(const SetPtr& s) {
    switch (s->kind) {
      case TSet::Kind::Singleton: {
        const int scope = tpl.evars[static_cast<std::size_t>(s->var)].scope;
        const auto chain = tpl.chain(scope);
        return std::none_of(enclosing.begin(), enclosing.end(), [&](int g) {
          return std::find(chain.begin(), chain.end(), g) != chain.end();
        });
      }
      case TSet::Kind::SVar: return false;
      case TSet::Kind::Explicit:
        return std::any_of(s->elems.begin(), s->elems.end(), [&](const PatPtr& p) { return pat(p); });
      case TSet::Kind::Bigcup: {
        enclosing.push_back(s->group);
        const bool r = set(s->body);
        enclosing.pop_back();
        return r;
      }
      case TSet::Kind::Union:
        return std::any_of(s->parts.begin(), s->parts.end(), [&](const SetPtr& q) { return set(q); });
    }
    return false;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Base templates

Template base_template(BaseAtom a) {
  Template t;
  if (a == BaseAtom::K) {
    // {t} -> ({} -> t)
    t.evars = {{"t", -1}};
    t.root = TPat::arrow(TSet::singleton(0), TPat::arrow(TSet::explicit_set({}), TPat::evar(0)));
    return t;
  }
  // {tau -> ({r_i}_n -> s)} -> ({sigma_i -> r_i}_n -> ((tau u U sigma_i) -> s))
  enum { kS = 0, kR = 1 };
  enum { kTau = 0, kSigma = 1 };
  const int n = 0;
  t.evars = {{"s", -1}, {"r", n}};
  t.svars = {{"\xcf\x84", -1}, {"\xcf\x83", n}};
  t.groups = {{"n", -1, 0}};
  auto tau = TSet::svar(kTau);
  auto left = TPat::arrow(tau, TPat::arrow(TSet::family(n, TPat::evar(kR)), TPat::evar(kS)));
  auto mid = TSet::family(n, TPat::arrow(TSet::svar(kSigma), TPat::evar(kR)));
  auto sigma = TSet::set_union({tau, TSet::bigcup(n, TSet::svar(kSigma))});
  t.root = TPat::arrow(TSet::explicit_set({left}),
                       TPat::arrow(mid, TPat::arrow(sigma, TPat::evar(kS))));
  return t;
}

bool has_singleton_setvar(const Template& tpl) { return SingletonScan{tpl, {}}.pat(tpl.root); }

// ---------------------------------------------------------------------------
// Composition

namespace {

const char* kPrime = "\xe2\x80\xb2";

class Unifier {
 public:
  Unifier(const Template& t1, const Template& t2) : t2_(t2), trace_(std::getenv("SKI_TRACE_COMPOSE") != nullptr) {
    evars_ = t1.evars;
    svars_ = t1.svars;
    groups_ = t1.groups;
    dead_.assign(groups_.size(), false);
    PatPtr root = t1.root;
    if (root->kind == TPat::Kind::Nat)
      throw UnificationFailure("a natural cannot be applied");
    if (root->kind == TPat::Kind::EVar) {
      // The generic member is arbitrary; only its arrows act on arguments.
      const int scope = evars_[static_cast<std::size_t>(root->var)].scope;
      const int a = new_svar("\xce\xb1", scope);
      const int b = new_evar("b", scope);
      root = TPat::arrow(TSet::svar(a), TPat::evar(b));
    }
    result_ = root->elem;
    push({Eq::AllInst, nullptr, nullptr, root->set, nullptr, -1});
  }

  Template run() {
    std::size_t guard = 0;
    while (!queue_.empty()) {
      if (++guard > 200000) throw UnsupportedShape("composition did not settle");
      Eq eq = queue_.front();
      queue_.pop_front();
      if (trace_) dump(eq);
      switch (eq.kind) {
        case Eq::Elem: solve_elem(eq.a, eq.b, eq.ctx); break;
        case Eq::Set: solve_set(eq.sa, eq.sb, eq.ctx); break;
        case Eq::AllInst: all_instances(eq.sa, eq.ctx); break;
      }
    }
    return collect();
  }

 private:
  struct Eq {
    enum Kind { Elem, Set, AllInst } kind;
    PatPtr a, b;
    SetPtr sa, sb;
    int ctx;
  };

  void push(Eq e) { queue_.push_back(std::move(e)); }

  void dump(const Eq& e) {
    Template t;
    t.evars = evars_;
    t.svars = svars_;
    t.groups = groups_;
    auto text = [&](const PatPtr& p) {
      t.root = p;
      return to_text(t);
    };
    auto stext = [&](const SetPtr& s) { return text(TPat::arrow(s, TPat::natural(0))); };
    const char* kinds[] = {"elem", "set", "inst"};
    std::fprintf(stderr, "[%s ctx=%d] ", kinds[e.kind], e.ctx);
    if (e.kind == Eq::Elem) std::fprintf(stderr, "%s  =  %s\n", text(e.a).c_str(), text(e.b).c_str());
    if (e.kind == Eq::Set) std::fprintf(stderr, "%s  =  %s\n", stext(e.sa).c_str(), stext(e.sb).c_str());
    if (e.kind == Eq::AllInst) std::fprintf(stderr, "%s\n", stext(e.sa).c_str());
    std::fprintf(stderr, "    result: %s\n", text(result_).c_str());
  }

  // -- tables -------------------------------------------------------------

  int new_evar(std::string name, int scope) {
    evars_.push_back({std::move(name), scope});
    return static_cast<int>(evars_.size()) - 1;
  }
  int new_svar(std::string name, int scope) {
    svars_.push_back({std::move(name), scope});
    return static_cast<int>(svars_.size()) - 1;
  }
  int new_group(std::string name, int parent, std::size_t min = 0) {
    groups_.push_back({std::move(name), parent, min});
    dead_.push_back(false);
    return static_cast<int>(groups_.size()) - 1;
  }
  GroupInfo& group(int g) { return groups_[static_cast<std::size_t>(g)]; }
  int& escope(int v) { return evars_[static_cast<std::size_t>(v)].scope; }
  int& sscope(int v) { return svars_[static_cast<std::size_t>(v)].scope; }

  int depth(int g) {
    int d = 0;
    for (; g >= 0; g = group(g).parent) ++d;
    return d;
  }
  bool is_ancestor_or_self(int anc, int g) {
    for (; g >= 0; g = group(g).parent)
      if (g == anc) return true;
    return anc < 0;
  }
  bool in_subtree(int g, int root) { return root >= 0 && g >= 0 && is_ancestor_or_self(root, g); }

  // -- fresh copies ---------------------------------------------------------

  PatPtr fresh_copy(int scope) {
    const Template& src = t2_;
    std::vector<int> gmap(src.groups.size(), -2);
    std::function<int(int)> map_group = [&](int g) -> int {
      if (g < 0) return scope;
      auto& m = gmap[static_cast<std::size_t>(g)];
      if (m == -2) {
        const auto& info = src.groups[static_cast<std::size_t>(g)];
        const int parent = map_group(info.parent);
        m = new_group(info.name + kPrime, parent, info.min);
      }
      return m;
    };
    for (std::size_t g = 0; g < src.groups.size(); ++g) map_group(static_cast<int>(g));
    std::vector<int> emap, smap;
    for (const auto& v : src.evars) emap.push_back(new_evar(v.name + kPrime, map_group(v.scope)));
    for (const auto& v : src.svars) smap.push_back(new_svar(v.name + kPrime, map_group(v.scope)));
    Rewrite rw;
    rw.evar = [&](int v) { return TPat::evar(emap[static_cast<std::size_t>(v)]); };
    rw.svar = [&](int v) { return TSet::svar(smap[static_cast<std::size_t>(v)]); };
    rw.bigcup = [&](int g, const SetPtr& body) {
      return TSet::bigcup(gmap[static_cast<std::size_t>(g)], body);
    };
    return rewrite_pat(src.root, rw);
  }

  // -- global rewriting of the state ---------------------------------------

  void apply_everywhere(const Rewrite& rw) {
    result_ = rewrite_pat(result_, rw);
    for (auto& e : queue_) {
      if (e.a) e.a = rewrite_pat(e.a, rw);
      if (e.b) e.b = rewrite_pat(e.b, rw);
      if (e.sa) e.sa = rewrite_set(e.sa, rw);
      if (e.sb) e.sb = rewrite_set(e.sb, rw);
    }
  }

  // Re-scopes variables and groups of a value about to be bound at `scope`
  // so that nothing in it varies over indices the variable does not see.
  void fix_scopes(const PatPtr& p, int scope) { fix_scopes_pat(p, chain_of(scope)); }
  std::vector<int> chain_of(int g) {
    std::vector<int> c;
    for (; g >= 0; g = group(g).parent) c.push_back(g);
    return c;
  }
  int nearest_visible(int g, const std::vector<int>& visible) {
    for (; g >= 0; g = group(g).parent)
      if (std::find(visible.begin(), visible.end(), g) != visible.end()) return g;
    return -1;
  }
  void fix_scopes_pat(const PatPtr& p, const std::vector<int>& visible) {
    switch (p->kind) {
      case TPat::Kind::EVar: escope(p->var) = nearest_visible(escope(p->var), visible); break;
      case TPat::Kind::Nat: break;
      case TPat::Kind::Arrow:
        fix_scopes_set(p->set, visible);
        fix_scopes_pat(p->elem, visible);
        break;
    }
  }
  void fix_scopes_set(const SetPtr& s, const std::vector<int>& visible) {
    switch (s->kind) {
      case TSet::Kind::SVar: sscope(s->var) = nearest_visible(sscope(s->var), visible); break;
      case TSet::Kind::Singleton: escope(s->var) = nearest_visible(escope(s->var), visible); break;
      case TSet::Kind::Explicit:
        for (const auto& e : s->elems) fix_scopes_pat(e, visible);
        break;
      case TSet::Kind::Bigcup: {
        group(s->group).parent = nearest_visible(group(s->group).parent, visible);
        auto inner = visible;
        inner.push_back(s->group);
        fix_scopes_set(s->body, inner);
        break;
      }
      case TSet::Kind::Union:
        for (const auto& q : s->parts) fix_scopes_set(q, visible);
        break;
    }
  }

  void bind_evar(int v, const PatPtr& p) {
    Occurrences o;
    occurrences(p, o);
    if (o.evars.count(v)) throw UnificationFailure("occurs check");
    fix_scopes(p, escope(v));
    Rewrite rw;
    rw.evar = [&](int w) { return w == v ? p : nullptr; };
    apply_everywhere(rw);
  }

  void bind_svar(int v, const SetPtr& s) {
    Occurrences o;
    occurrences(s, o);
    if (o.svars.count(v)) throw UnsupportedShape("set variable occurs in its own value");
    fix_scopes_set(s, chain_of(sscope(v)));
    Rewrite rw;
    rw.svar = [&](int w) { return w == v ? s : nullptr; };
    apply_everywhere(rw);
  }

  bool eq_touches_subtree(const Eq& e, int g) {
    if (in_subtree(e.ctx, g)) return true;
    Occurrences o;
    if (e.a) occurrences(e.a, o);
    if (e.b) occurrences(e.b, o);
    if (e.sa) occurrences(e.sa, o);
    if (e.sb) occurrences(e.sb, o);
    for (int v : o.evars)
      if (in_subtree(escope(v), g)) return true;
    for (int v : o.svars)
      if (in_subtree(sscope(v), g)) return true;
    for (int h : o.groups)
      if (in_subtree(h, g)) return true;
    return false;
  }

  void zero_group(int g) {
    if (group(g).min > 0) throw UnificationFailure("group forced both empty and nonempty");
    for (std::size_t h = 0; h < groups_.size(); ++h)
      if (in_subtree(static_cast<int>(h), g)) dead_[h] = true;
    std::deque<Eq> kept;
    for (auto& e : queue_)
      if (!in_subtree(e.ctx, g)) kept.push_back(std::move(e));
    queue_ = std::move(kept);
    Rewrite rw;
    rw.bigcup = [&](int h, const SetPtr&) -> SetPtr {
      return h == g ? TSet::explicit_set({}) : nullptr;
    };
    apply_everywhere(rw);
  }

  // Makes g independent of the indices between its parent and new_parent
  // (an ancestor); variables inside its unions lose those indices too.
  void lift_group(int g, int new_parent) {
    group(g).parent = new_parent;
    const auto visible = chain_of(new_parent);
    Rewrite rw;
    rw.bigcup = [&](int h, const SetPtr& body) -> SetPtr {
      if (h == g) fix_scopes_set(TSet::bigcup(h, body), visible);
      return nullptr;
    };
    apply_everywhere(rw);
  }

  // Brings two groups to a common parent by lifting the deeper one. Only
  // `flexible` may be lifted (-2: either); lifting an element family is
  // exact, since it must enumerate the same set at every outer index.
  void align_parents(int a, int b, int flexible) {
    const int pa = group(a).parent, pb = group(b).parent;
    if (pa == pb) return;
    if (is_ancestor_or_self(pa, pb)) {
      if (flexible != b && flexible != -2) throw UnsupportedShape("indexed unions at different nesting levels");
      lift_group(b, pa);
    } else if (is_ancestor_or_self(pb, pa)) {
      if (flexible != a && flexible != -2) throw UnsupportedShape("indexed unions at different nesting levels");
      lift_group(a, pb);
    } else {
      throw UnsupportedShape("indexed unions on unrelated nesting levels");
    }
  }

  void merge_groups(int from, int into) {
    if (from == into) return;
    align_parents(from, into, -2);
    group(into).min = std::max(group(into).min, group(from).min);
    for (auto& v : evars_)
      if (v.scope == from) v.scope = into;
    for (auto& v : svars_)
      if (v.scope == from) v.scope = into;
    for (auto& gi : groups_)
      if (gi.parent == from) gi.parent = into;
    for (auto& e : queue_)
      if (e.ctx == from) e.ctx = into;
    dead_[static_cast<std::size_t>(from)] = true;
    Rewrite rw;
    rw.bigcup = [&](int h, const SetPtr& body) -> SetPtr {
      return h == from ? TSet::bigcup(into, body) : nullptr;
    };
    apply_everywhere(rw);
  }

  // Replaces group g by a group nested under m: every index of g becomes a
  // pair (index of m, index of the new group).
  int rechain(int g, int m) {
    align_parents(g, m, g);
    const int h = new_group(group(g).name, m, group(g).min);
    if (group(g).min > 0) group(m).min = std::max<std::size_t>(group(m).min, 1);
    for (auto& v : evars_)
      if (v.scope == g) v.scope = h;
    for (auto& v : svars_)
      if (v.scope == g) v.scope = h;
    for (std::size_t i = 0; i < groups_.size(); ++i)
      if (groups_[i].parent == g && static_cast<int>(i) != h) groups_[i].parent = h;
    for (auto& e : queue_)
      if (e.ctx == g) e.ctx = h;
    dead_[static_cast<std::size_t>(g)] = true;
    Rewrite rw;
    rw.bigcup = [&](int k, const SetPtr& body) -> SetPtr {
      return k == g ? TSet::bigcup(m, TSet::bigcup(h, body)) : nullptr;
    };
    apply_everywhere(rw);
    return h;
  }

  // Splits group g into k groups whose indexed unions together replace g's.
  // Returns the k renamed copies of `node`.
  std::vector<SetPtr> split_group(int g, std::size_t k, const SetPtr& node) {
    std::vector<int> subtree;
    for (std::size_t h = 0; h < groups_.size(); ++h)
      if (!dead_[h] && in_subtree(static_cast<int>(h), g)) subtree.push_back(static_cast<int>(h));
    std::vector<int> subtree_evars, subtree_svars;
    for (std::size_t v = 0; v < evars_.size(); ++v)
      if (in_subtree(evars_[v].scope, g)) subtree_evars.push_back(static_cast<int>(v));
    for (std::size_t v = 0; v < svars_.size(); ++v)
      if (in_subtree(svars_[v].scope, g)) subtree_svars.push_back(static_cast<int>(v));

    struct Copy {
      std::unordered_map<int, int> g, e, s;
    };
    std::vector<Copy> copies(k);
    for (std::size_t j = 0; j < k; ++j) {
      auto& c = copies[j];
      const std::string suffix = std::to_string(j + 1);
      std::function<int(int)> mg = [&](int h) -> int {
        if (!in_subtree(h, g)) return h;
        auto it = c.g.find(h);
        if (it != c.g.end()) return it->second;
        const int parent = h == g ? group(g).parent : mg(group(h).parent);
        const int nh = new_group(group(h).name + suffix, parent, h == g ? 0 : group(h).min);
        c.g[h] = nh;
        return nh;
      };
      for (int h : subtree) mg(h);
      for (int v : subtree_evars)
        c.e[v] = new_evar(evars_[static_cast<std::size_t>(v)].name + suffix, mg(escope(v)));
      for (int v : subtree_svars)
        c.s[v] = new_svar(svars_[static_cast<std::size_t>(v)].name + suffix, mg(sscope(v)));
    }
    auto renamer = [&](const Copy& c) {
      Rewrite rw;
      rw.evar = [&c](int v) -> PatPtr {
        auto it = c.e.find(v);
        return it == c.e.end() ? nullptr : TPat::evar(it->second);
      };
      rw.svar = [&c](int v) -> SetPtr {
        auto it = c.s.find(v);
        return it == c.s.end() ? nullptr : TSet::svar(it->second);
      };
      rw.bigcup = [&c](int h, const SetPtr& body) -> SetPtr {
        auto it = c.g.find(h);
        return it == c.g.end() ? nullptr : TSet::bigcup(it->second, body);
      };
      return rw;
    };
    // Equations living inside g are duplicated once per part.
    std::deque<Eq> next;
    for (auto& e : queue_) {
      if (!in_subtree(e.ctx, g)) {
        next.push_back(std::move(e));
        continue;
      }
      for (const auto& c : copies) {
        const Rewrite rw = renamer(c);
        Eq d = e;
        if (d.a) d.a = rewrite_pat(d.a, rw);
        if (d.b) d.b = rewrite_pat(d.b, rw);
        if (d.sa) d.sa = rewrite_set(d.sa, rw);
        if (d.sb) d.sb = rewrite_set(d.sb, rw);
        d.ctx = c.g.at(d.ctx);
        next.push_back(std::move(d));
      }
    }
    queue_ = std::move(next);
    Rewrite rw;
    rw.bigcup = [&](int h, const SetPtr& body) -> SetPtr {
      if (h != g) return nullptr;
      std::vector<SetPtr> parts;
      for (const auto& c : copies) parts.push_back(rewrite_set(TSet::bigcup(g, body), renamer(c)));
      return TSet::set_union(std::move(parts));
    };
    apply_everywhere(rw);
    for (int h : subtree) dead_[static_cast<std::size_t>(h)] = true;
    std::vector<SetPtr> out;
    for (const auto& c : copies) out.push_back(rewrite_set(node, renamer(c)));
    return out;
  }

  // -- the antecedent constraint ---------------------------------------------

  // Every element of the set must be a member of the argument's template.
  void all_instances(const SetPtr& s, int ctx) {
    switch (s->kind) {
      case TSet::Kind::Explicit:
        for (const auto& p : s->elems) push({Eq::Elem, p, fresh_copy(ctx), nullptr, nullptr, ctx});
        return;
      case TSet::Kind::Singleton: {
        const int t = s->var;
        bind_evar(t, fresh_copy(escope(t)));
        return;
      }
      case TSet::Kind::SVar: {
        const int v = s->var;
        const int g = new_group("m", sscope(v));
        bind_svar(v, TSet::family(g, fresh_copy(g)));
        return;
      }
      case TSet::Kind::Bigcup:
        push({Eq::AllInst, nullptr, nullptr, s->body, nullptr, s->group});
        return;
      case TSet::Kind::Union:
        for (const auto& q : s->parts) push({Eq::AllInst, nullptr, nullptr, q, nullptr, ctx});
        return;
    }
  }

  // -- element equations ------------------------------------------------------

  void solve_elem(const PatPtr& a, const PatPtr& b, int ctx) {
    if (pat_equal(a, b)) return;
    if (a->kind == TPat::Kind::EVar && b->kind == TPat::Kind::EVar) {
      if (depth(escope(a->var)) >= depth(escope(b->var))) {
        bind_evar(a->var, b);
      } else {
        bind_evar(b->var, a);
      }
      return;
    }
    if (a->kind == TPat::Kind::EVar) return bind_evar(a->var, b);
    if (b->kind == TPat::Kind::EVar) return bind_evar(b->var, a);
    if (a->kind != b->kind) throw UnificationFailure("natural against arrow");
    if (a->kind == TPat::Kind::Nat) {
      if (a->nat != b->nat) throw UnificationFailure("distinct naturals");
      return;
    }
    push({Eq::Set, nullptr, nullptr, a->set, b->set, ctx});
    push({Eq::Elem, a->elem, b->elem, nullptr, nullptr, ctx});
  }

  // -- set equations ------------------------------------------------------------

  struct Comp {
    enum Kind { E, V, F } kind;
    PatPtr elem;  // E
    int id = -1;  // V: svar, F: group
    SetPtr body;  // F
    SetPtr node;
  };

  static std::vector<Comp> components(const SetPtr& s) {
    std::vector<Comp> out;
    std::function<void(const SetPtr&)> add = [&](const SetPtr& x) {
      switch (x->kind) {
        case TSet::Kind::Union:
          for (const auto& q : x->parts) add(q);
          break;
        case TSet::Kind::Explicit:
          for (const auto& e : x->elems) out.push_back({Comp::E, e, -1, nullptr, TSet::explicit_set({e})});
          break;
        case TSet::Kind::Singleton:
          out.push_back({Comp::E, TPat::evar(x->var), -1, nullptr, x});
          break;
        case TSet::Kind::SVar: out.push_back({Comp::V, nullptr, x->var, nullptr, x}); break;
        case TSet::Kind::Bigcup: out.push_back({Comp::F, nullptr, x->group, x->body, x}); break;
      }
    };
    add(s);
    return out;
  }

  static std::optional<PatPtr> single_elem(const SetPtr& body) {
    if (body->kind == TSet::Kind::Explicit && body->elems.size() == 1) return body->elems[0];
    if (body->kind == TSet::Kind::Singleton) return TPat::evar(body->var);
    return std::nullopt;
  }

  static bool mentions_group(const SetPtr& s, int g) {
    Occurrences o;
    occurrences(s, o);
    return o.groups.count(g) > 0;
  }

  void solve_set(const SetPtr& a, const SetPtr& b, int ctx) {
    if (set_equal(a, b)) return;
    const auto ca = components(a);
    const auto cb = components(b);

    if (ca.size() == 1 && cb.size() == 1 && ca[0].kind == Comp::V && cb[0].kind == Comp::V) {
      if (depth(sscope(ca[0].id)) >= depth(sscope(cb[0].id))) {
        bind_svar(ca[0].id, b);
      } else {
        bind_svar(cb[0].id, a);
      }
      return;
    }
    if (ca.size() == 1 && ca[0].kind == Comp::V) return bind_svar(ca[0].id, b);
    if (cb.size() == 1 && cb[0].kind == Comp::V) return bind_svar(cb[0].id, a);
    if (ca.empty()) return solve_empty(cb, ctx);
    if (cb.empty()) return solve_empty(ca, ctx);
    // An element family is the easier side to distribute over the other.
    auto element_family = [](const std::vector<Comp>& c) {
      return c.size() == 1 && c[0].kind == Comp::F && single_elem(c[0].body);
    };
    if (element_family(ca)) return solve_family(ca[0], cb, ctx);
    if (element_family(cb)) return solve_family(cb[0], ca, ctx);
    if (ca.size() == 1 && ca[0].kind == Comp::F) return solve_family(ca[0], cb, ctx);
    if (cb.size() == 1 && cb[0].kind == Comp::F) return solve_family(cb[0], ca, ctx);
    if (ca.size() == 1 && ca[0].kind == Comp::E) return solve_single(ca[0].elem, cb, ctx);
    if (cb.size() == 1 && cb[0].kind == Comp::E) return solve_single(cb[0].elem, ca, ctx);
    throw UnsupportedShape("set equation between two multi-part unions");
  }

  // Every component must denote the empty set.
  void solve_empty(const std::vector<Comp>& cs, int ctx) {
    for (const auto& c : cs) {
      switch (c.kind) {
        case Comp::E: throw UnificationFailure("nonempty set against the empty set");
        case Comp::V: push({Eq::Set, nullptr, nullptr, c.node, TSet::explicit_set({}), ctx}); break;
        case Comp::F: {
          bool nonempty = false;
          for (const auto& d : components(c.body)) nonempty = nonempty || d.kind == Comp::E;
          if (nonempty) {
            zero_group(c.id);
          } else {
            push({Eq::Set, nullptr, nullptr, c.body, TSet::explicit_set({}), c.id});
          }
          break;
        }
      }
    }
  }

  // An indexed union against a list of components.
  void solve_family(const Comp& f, const std::vector<Comp>& cs, int ctx) {
    const auto elem = single_elem(f.body);
    if (!elem) {
      if (cs.size() == 1 && cs[0].kind == Comp::F && group(cs[0].id).parent == group(f.id).parent) {
        merge_groups(cs[0].id, f.id);
        push({Eq::Set, nullptr, nullptr, f.body, cs[0].body, f.id});
        return;
      }
      throw UnsupportedShape("indexed union of sets against a non-family");
    }
    for (const auto& c : cs)
      if (mentions_group(c.node, f.id)) throw UnsupportedShape("group on both sides");
    if (cs.size() == 1) return family_vs_one(f.id, *elem, cs[0]);
    bool has_e = false;
    for (const auto& c : cs) has_e = has_e || c.kind == Comp::E;
    if (group(f.id).min > 0 && !has_e)
      throw UnsupportedShape("nonempty family split over possibly empty parts");
    const auto parts = split_group(f.id, cs.size(), f.node);
    for (std::size_t j = 0; j < cs.size(); ++j) push({Eq::Set, nullptr, nullptr, parts[j], cs[j].node, ctx});
  }

  void family_vs_one(int g, const PatPtr& b, const Comp& c) {
    switch (c.kind) {
      case Comp::E:
        group(g).min = std::max<std::size_t>(group(g).min, 1);
        push({Eq::Elem, b, c.elem, nullptr, nullptr, g});
        return;
      case Comp::V:
        bind_svar(c.id, TSet::family(g, b));
        return;
      case Comp::F: {
        if (auto other = single_elem(c.body)) {
          merge_groups(c.id, g);
          push({Eq::Elem, b, *other, nullptr, nullptr, g});
          return;
        }
        const int h = rechain(g, c.id);
        push({Eq::Set, nullptr, nullptr, c.body, TSet::family(h, b), c.id});
        return;
      }
    }
  }

  // {p} equals the union of the components.
  void solve_single(const PatPtr& p, const std::vector<Comp>& cs, int ctx) {
    bool has_e = false;
    for (const auto& c : cs) has_e = has_e || c.kind == Comp::E;
    if (!has_e) throw UnsupportedShape("singleton against a union without explicit members");
    for (const auto& c : cs) {
      switch (c.kind) {
        case Comp::E: push({Eq::Elem, c.elem, p, nullptr, nullptr, ctx}); break;
        case Comp::V: {
          const int g = new_group("k", sscope(c.id));
          push({Eq::Set, nullptr, nullptr, c.node, TSet::family(g, p), ctx});
          break;
        }
        case Comp::F: {
          if (auto e = single_elem(c.body)) {
            push({Eq::Elem, *e, p, nullptr, nullptr, c.id});
          } else {
            const int h = new_group("k", c.id);
            push({Eq::Set, nullptr, nullptr, c.body, TSet::family(h, p), c.id});
          }
          break;
        }
      }
    }
  }

  // -- result ---------------------------------------------------------------

  Template collect() {
    Template out;
    std::unordered_map<int, int> em, sm, gm;
    std::function<int(int)> map_group = [&](int g) -> int {
      if (g < 0) return -1;
      auto it = gm.find(g);
      if (it != gm.end()) return it->second;
      const int parent = map_group(group(g).parent);
      out.groups.push_back({group(g).name, parent, group(g).min});
      const int id = static_cast<int>(out.groups.size()) - 1;
      gm[g] = id;
      return id;
    };
    Rewrite rw;
    rw.evar = [&](int v) -> PatPtr {
      auto it = em.find(v);
      if (it == em.end()) {
        const auto& info = evars_[static_cast<std::size_t>(v)];
        out.evars.push_back({info.name, map_group(info.scope)});
        it = em.emplace(v, static_cast<int>(out.evars.size()) - 1).first;
      }
      return TPat::evar(it->second);
    };
    rw.svar = [&](int v) -> SetPtr {
      auto it = sm.find(v);
      if (it == sm.end()) {
        const auto& info = svars_[static_cast<std::size_t>(v)];
        out.svars.push_back({info.name, map_group(info.scope)});
        it = sm.emplace(v, static_cast<int>(out.svars.size()) - 1).first;
      }
      return TSet::svar(it->second);
    };
    rw.bigcup = [&](int g, const SetPtr& body) { return TSet::bigcup(map_group(g), body); };
    out.root = rewrite_pat(result_, rw);
    dedupe_names(out);
    return out;
  }

  static std::string strip_primes(std::string s) {
    const std::string prime = kPrime;
    for (auto p = s.find(prime); p != std::string::npos; p = s.find(prime)) s.erase(p, prime.size());
    return s;
  }

  // Primes are dropped when no two names would coincide without them.
  template <class Vars>
  static void drop_primes(std::vector<Vars*> vars) {
    std::set<std::string> plain;
    for (auto* v : vars)
      if (!plain.insert(strip_primes(v->name)).second) return;
    for (auto* v : vars) v->name = strip_primes(v->name);
  }

  static void dedupe_names(Template& t) {
    std::vector<VarInfo*> vs;
    for (auto& v : t.evars) vs.push_back(&v);
    for (auto& v : t.svars) vs.push_back(&v);
    drop_primes(vs);
    std::vector<GroupInfo*> gs;
    for (auto& g : t.groups) gs.push_back(&g);
    drop_primes(gs);
    std::set<std::string> used;
    auto fix = [&](std::string& name) {
      if (used.insert(name).second) return;
      for (int k = 2;; ++k) {
        std::string cand = name + std::to_string(k);
        if (used.insert(cand).second) {
          name = cand;
          return;
        }
      }
    };
    for (auto& v : t.evars) fix(v.name);
    for (auto& v : t.svars) fix(v.name);
    used.clear();
    for (auto& g : t.groups) fix(g.name);
  }

  const Template& t2_;
  bool trace_;
  std::vector<VarInfo> evars_, svars_;
  std::vector<GroupInfo> groups_;
  std::vector<bool> dead_;
  PatPtr result_;
  std::deque<Eq> queue_;
};

}  // namespace

Template compose(const Template& t1, const Template& t2) { return Unifier(t1, t2).run(); }

Template template_of(const Term& t) {
  static std::shared_mutex mu;
  static std::unordered_map<Term, Template, TermHash> cache;
  {
    std::shared_lock lock(mu);
    if (auto it = cache.find(t); it != cache.end()) return it->second;
  }
  Template result;
  if (t.is_atom() && t.atom_value() == Atom::K) {
    result = base_template(BaseAtom::K);
  } else if (t.is_atom() && t.atom_value() == Atom::S) {
    result = base_template(BaseAtom::S);
  } else if (t.is_app()) {
    result = compose(template_of(t.left()), template_of(t.right()));
  } else {
    throw PreconditionError("templates exist only for closed {S,K} terms: " + print_term(t));
  }
  std::unique_lock lock(mu);
  cache.emplace(t, result);
  return result;
}

// ---------------------------------------------------------------------------
// Printing and JSON

namespace {

const char* kArrow = " \xe2\x86\xa3 ";
const char* kCup = "\xe2\x88\xaa";
const char* kEmpty = "\xe2\x88\x85";

std::string index_letters(const Template& t, int scope) {
  static const char* letters[] = {"i", "j", "k", "l", "m", "p", "q"};
  std::string out;
  const auto chain = t.chain(scope);
  for (std::size_t d = 0; d < chain.size(); ++d) out += d < 7 ? letters[d] : "i" + std::to_string(d);
  return out;
}

std::string var_text(const Template& t, const VarInfo& v) {
  if (v.scope < 0) return v.name;
  return v.name + "_" + index_letters(t, v.scope);
}

std::string group_text(const Template& t, int g) {
  const auto& info = t.groups[static_cast<std::size_t>(g)];
  if (info.parent < 0) return info.name;
  return info.name + "_" + index_letters(t, info.parent);
}

std::string set_text(const Template& t, const SetPtr& s);

std::string pat_text(const Template& t, const PatPtr& p, bool top) {
  switch (p->kind) {
    case TPat::Kind::EVar: return var_text(t, t.evars[static_cast<std::size_t>(p->var)]);
    case TPat::Kind::Nat: return std::to_string(p->nat);
    case TPat::Kind::Arrow: {
      std::string inner = set_text(t, p->set) + kArrow + pat_text(t, p->elem, false);
      return top ? inner : "(" + inner + ")";
    }
  }
  return "?";
}

std::string set_text(const Template& t, const SetPtr& s) {
  switch (s->kind) {
    case TSet::Kind::SVar: return var_text(t, t.svars[static_cast<std::size_t>(s->var)]);
    case TSet::Kind::Singleton:
      return "{" + var_text(t, t.evars[static_cast<std::size_t>(s->var)]) + "}";
    case TSet::Kind::Explicit: {
      if (s->elems.empty()) return kEmpty;
      std::string out = "{";
      for (std::size_t i = 0; i < s->elems.size(); ++i) {
        if (i) out += ", ";
        out += pat_text(t, s->elems[i], true);
      }
      return out + "}";
    }
    case TSet::Kind::Bigcup: {
      if (s->body->kind == TSet::Kind::Explicit && s->body->elems.size() == 1)
        return "{" + pat_text(t, s->body->elems[0], true) + "}_" + group_text(t, s->group);
      if (s->body->kind == TSet::Kind::Singleton)
        return "{" + var_text(t, t.evars[static_cast<std::size_t>(s->body->var)]) + "}_" + group_text(t, s->group);
      if (s->body->kind == TSet::Kind::SVar) return kCup + set_text(t, s->body);
      return std::string(kCup) + "_" + group_text(t, s->group) + " " + set_text(t, s->body);
    }
    case TSet::Kind::Union: {
      std::string out = "(";
      for (std::size_t i = 0; i < s->parts.size(); ++i) {
        if (i) out += std::string(" ") + kCup + " ";
        out += set_text(t, s->parts[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

nlohmann::json set_json(const Template& t, const SetPtr& s);

nlohmann::json pat_json(const Template& t, const PatPtr& p) {
  switch (p->kind) {
    case TPat::Kind::EVar: return {{"evar", p->var}};
    case TPat::Kind::Nat: return {{"nat", p->nat}};
    case TPat::Kind::Arrow:
      return {{"tarrow", nlohmann::json::array({set_json(t, p->set), pat_json(t, p->elem)})}};
  }
  return nullptr;
}

nlohmann::json set_json(const Template& t, const SetPtr& s) {
  switch (s->kind) {
    case TSet::Kind::SVar: return {{"svar", s->var}};
    case TSet::Kind::Singleton: return {{"singleton", s->var}};
    case TSet::Kind::Explicit: {
      auto a = nlohmann::json::array();
      for (const auto& e : s->elems) a.push_back(pat_json(t, e));
      return {{"explicit", a}};
    }
    case TSet::Kind::Bigcup: {
      const std::string index = index_letters(t, s->group).substr(index_letters(t, s->group).size() - 1);
      if (s->body->kind == TSet::Kind::Explicit && s->body->elems.size() == 1)
        return {{"family", {{"arity", s->group}, {"index", index}, {"body", pat_json(t, s->body->elems[0])}}}};
      if (s->body->kind == TSet::Kind::Singleton)
        return {{"family", {{"arity", s->group}, {"index", index}, {"body", {{"evar", s->body->var}}}}}};
      return {{"bigunion", {{"arity", s->group}, {"index", index}, {"body", set_json(t, s->body)}}}};
    }
    case TSet::Kind::Union: {
      auto a = nlohmann::json::array();
      for (const auto& q : s->parts) a.push_back(set_json(t, q));
      return {{"union", a}};
    }
  }
  return nullptr;
}

}  // namespace

std::string to_text(const Template& tpl) { return pat_text(tpl, tpl.root, true); }

nlohmann::json to_json(const Template& tpl) {
  auto vars = [](const std::vector<VarInfo>& vs) {
    auto a = nlohmann::json::array();
    for (std::size_t i = 0; i < vs.size(); ++i)
      a.push_back({{"id", i}, {"name", vs[i].name}, {"scope", vs[i].scope}});
    return a;
  };
  auto groups = nlohmann::json::array();
  for (std::size_t i = 0; i < tpl.groups.size(); ++i)
    groups.push_back({{"id", i},
                      {"name", tpl.groups[i].name},
                      {"parent", tpl.groups[i].parent},
                      {"min", tpl.groups[i].min}});
  return {{"root", pat_json(tpl, tpl.root)},
          {"evars", vars(tpl.evars)},
          {"svars", vars(tpl.svars)},
          {"arities", groups},
          {"text", to_text(tpl)}};
}

bool well_formed(const Template& tpl, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const int ne = static_cast<int>(tpl.evars.size());
  const int ns = static_cast<int>(tpl.svars.size());
  const int ng = static_cast<int>(tpl.groups.size());
  for (const auto& g : tpl.groups)
    if (g.parent >= ng) return fail("bad group parent");
  std::function<bool(const SetPtr&, std::vector<int>&)> ws;
  auto visible = [](int scope, const std::vector<int>& active) {
    return scope < 0 || std::find(active.begin(), active.end(), scope) != active.end();
  };
  std::function<bool(const PatPtr&, std::vector<int>&)> wp = [&](const PatPtr& p,
                                                                 std::vector<int>& active) {
    switch (p->kind) {
      case TPat::Kind::EVar:
        if (p->var < 0 || p->var >= ne) return fail("undeclared element variable");
        if (!visible(tpl.evars[static_cast<std::size_t>(p->var)].scope, active))
          return fail("element variable outside its indexed union");
        return true;
      case TPat::Kind::Nat: return true;
      case TPat::Kind::Arrow: return ws(p->set, active) && wp(p->elem, active);
    }
    return false;
  };
  ws = [&](const SetPtr& s, std::vector<int>& active) {
    switch (s->kind) {
      case TSet::Kind::SVar:
        if (s->var < 0 || s->var >= ns) return fail("undeclared set variable");
        if (!visible(tpl.svars[static_cast<std::size_t>(s->var)].scope, active))
          return fail("set variable outside its indexed union");
        return true;
      case TSet::Kind::Singleton:
        if (s->var < 0 || s->var >= ne) return fail("undeclared element variable");
        if (!visible(tpl.evars[static_cast<std::size_t>(s->var)].scope, active))
          return fail("element variable outside its indexed union");
        return true;
      case TSet::Kind::Explicit:
        for (const auto& e : s->elems)
          if (!wp(e, active)) return false;
        return true;
      case TSet::Kind::Bigcup: {
        if (s->group < 0 || s->group >= ng) return fail("undeclared arity");
        if (!visible(tpl.groups[static_cast<std::size_t>(s->group)].parent, active))
          return fail("indexed union outside its parent");
        active.push_back(s->group);
        const bool ok = ws(s->body, active);
        active.pop_back();
        return ok;
      }
      case TSet::Kind::Union:
        for (const auto& q : s->parts)
          if (!ws(q, active)) return false;
        return true;
    }
    return false;
  };
  std::vector<int> active;
  return wp(tpl.root, active);
}

}  // namespace ski
