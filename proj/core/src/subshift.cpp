#include <algorithm>
#include <deque>
#include <stdexcept>

#include "flowline/subshift.hpp"

namespace flowline {

bool InvAlphabet::involution_fixed_point_free() const {
  if (!has_involution()) return false;
  for (int i = 0; i < size(); ++i)
    if (inv[i] == i) return false;
  return true;
}

int InvAlphabet::index(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (letters[i] == name) return i;
  throw std::invalid_argument("unknown letter: " + name);
}

void InvAlphabet::check() const {
  if (letters.empty()) throw std::invalid_argument("empty alphabet");
  if (!inv.empty()) {
    if (inv.size() != letters.size()) throw std::invalid_argument("involution size mismatch");
    for (int i = 0; i < size(); ++i) {
      if (inv[i] < 0 || inv[i] >= size() || inv[inv[i]] != i)
        throw std::invalid_argument("letter involution is not an involution");
    }
  }
}

struct Sft::Impl {
  InvAlphabet alphabet;
  int memory = 1;
  std::vector<Word> verts;
  std::map<Word, int> vindex;
  std::vector<std::vector<int>> out, in;
  bool involution = false;
  mutable std::optional<long> sep_radius;
};

namespace {

bool contains_factor(const Word& w, const Word& f) {
  if (f.size() > w.size()) return false;
  for (std::size_t i = 0; i + f.size() <= w.size(); ++i) {
    if (std::equal(f.begin(), f.end(), w.begin() + i)) return true;
  }
  return false;
}

void trim_graph(std::vector<Word>& verts, std::vector<std::vector<int>>& out,
                std::vector<std::vector<int>>& in) {
  const int n = static_cast<int>(verts.size());
  std::vector<bool> dead(n, false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (dead[v]) continue;
      int od = 0, id = 0;
      for (int u : out[v])
        if (!dead[u]) ++od;
      for (int u : in[v])
        if (!dead[u]) ++id;
      if (od == 0 || id == 0) {
        dead[v] = true;
        changed = true;
      }
    }
  }
  std::vector<int> remap(n, -1);
  std::vector<Word> nv;
  for (int v = 0; v < n; ++v) {
    if (!dead[v]) {
      remap[v] = static_cast<int>(nv.size());
      nv.push_back(verts[v]);
    }
  }
  std::vector<std::vector<int>> no(nv.size()), ni(nv.size());
  for (int v = 0; v < n; ++v) {
    if (dead[v]) continue;
    for (int u : out[v])
      if (!dead[u]) no[remap[v]].push_back(remap[u]);
    for (int u : in[v])
      if (!dead[u]) ni[remap[v]].push_back(remap[u]);
  }
  verts = std::move(nv);
  out = std::move(no);
  in = std::move(ni);
}

}  // namespace

Sft Sft::from_forbidden(InvAlphabet alphabet, std::vector<Word> forbidden, bool use_involution) {
  alphabet.check();
  if (use_involution && !alphabet.has_involution())
    throw std::invalid_argument("involution requested but alphabet has none");
  auto impl = std::make_shared<Impl>();
  impl->alphabet = alphabet;
  impl->involution = use_involution;
  std::size_t maxlen = 2;
  for (const auto& f : forbidden) {
    if (f.empty()) throw std::invalid_argument("empty forbidden word");
    maxlen = std::max(maxlen, f.size());
  }
  const int m = static_cast<int>(maxlen) - 1;
  impl->memory = m;
  // allowed m-words
  std::vector<Word> words;
  Word cur;
  std::function<void()> gen = [&]() {
    if (static_cast<int>(cur.size()) == m) {
      words.push_back(cur);
      return;
    }
    for (int l = 0; l < alphabet.size(); ++l) {
      cur.push_back(l);
      bool ok = true;
      for (const auto& f : forbidden)
        if (contains_factor(cur, f)) ok = false;
      if (ok) gen();
      cur.pop_back();
    }
  };
  gen();
  std::vector<std::vector<int>> out(words.size()), in(words.size());
  std::map<Word, int> idx;
  for (std::size_t i = 0; i < words.size(); ++i) idx[words[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int l = 0; l < alphabet.size(); ++l) {
      Word ext = words[i];
      ext.push_back(l);
      bool ok = true;
      for (const auto& f : forbidden)
        if (contains_factor(ext, f)) ok = false;
      if (!ok) continue;
      Word nxt(ext.begin() + 1, ext.end());
      auto it = idx.find(nxt);
      if (it == idx.end()) continue;
      out[i].push_back(it->second);
      in[it->second].push_back(static_cast<int>(i));
    }
  }
  trim_graph(words, out, in);
  if (words.empty()) throw std::invalid_argument("subshift is empty after trimming");
  impl->verts = words;
  for (std::size_t i = 0; i < words.size(); ++i) impl->vindex[words[i]] = static_cast<int>(i);
  impl->out = std::move(out);
  impl->in = std::move(in);
  return Sft(std::move(impl));
}

Sft Sft::full_shift(InvAlphabet alphabet, bool use_involution) {
  return from_forbidden(std::move(alphabet), {}, use_involution);
}

Sft Sft::from_graph(InvAlphabet alphabet, int memory, std::vector<Word> vertices,
                    std::vector<std::pair<int, int>> edges, bool use_involution) {
  alphabet.check();
  if (use_involution && !alphabet.has_involution())
    throw std::invalid_argument("involution requested but alphabet has none");
  auto impl = std::make_shared<Impl>();
  impl->alphabet = std::move(alphabet);
  impl->involution = use_involution;
  impl->memory = memory;
  std::vector<std::vector<int>> out(vertices.size()), in(vertices.size());
  for (auto [u, v] : edges) {
    if (static_cast<int>(vertices[u].size()) != memory ||
        static_cast<int>(vertices[v].size()) != memory)
      throw std::invalid_argument("vertex word length must equal the memory");
    if (memory > 1 &&
        !std::equal(vertices[u].begin() + 1, vertices[u].end(), vertices[v].begin()))
      throw std::invalid_argument("edge endpoints do not overlap");
    out[u].push_back(v);
    in[v].push_back(u);
  }
  trim_graph(vertices, out, in);
  if (vertices.empty()) throw std::invalid_argument("subshift is empty after trimming");
  impl->verts = vertices;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    impl->vindex[vertices[i]] = static_cast<int>(i);
  impl->out = std::move(out);
  impl->in = std::move(in);
  return Sft(std::move(impl));
}

const InvAlphabet& Sft::alphabet() const { return impl_->alphabet; }
int Sft::memory() const { return impl_->memory; }
const std::vector<Word>& Sft::vertices() const { return impl_->verts; }
const std::vector<std::vector<int>>& Sft::out_edges() const { return impl_->out; }
const std::vector<std::vector<int>>& Sft::in_edges() const { return impl_->in; }
bool Sft::has_involution() const { return impl_->involution; }

int Sft::vertex_index(const Word& w) const {
  auto it = impl_->vindex.find(w);
  return it == impl_->vindex.end() ? -1 : it->second;
}

bool Sft::word_allowed(const Word& w) const {
  const int m = impl_->memory;
  if (w.empty()) return true;
  if (static_cast<int>(w.size()) <= m) {
    for (const auto& v : impl_->verts)
      if (contains_factor(v, w)) return true;
    return false;
  }
  int prev = vertex_index(Word(w.begin(), w.begin() + m));
  if (prev < 0) return false;
  for (std::size_t i = 1; i + m <= w.size(); ++i) {
    int nxt = vertex_index(Word(w.begin() + i, w.begin() + i + m));
    if (nxt < 0) return false;
    if (std::find(impl_->out[prev].begin(), impl_->out[prev].end(), nxt) ==
        impl_->out[prev].end())
      return false;
    prev = nxt;
  }
  return true;
}

std::vector<int> Sft::followers(const Word& w) const {
  const int m = impl_->memory;
  if (static_cast<int>(w.size()) < m) throw std::invalid_argument("followers needs >= m letters");
  const int v = vertex_index(Word(w.end() - m, w.end()));
  std::vector<int> out;
  if (v < 0) return out;
  for (int u : impl_->out[v]) out.push_back(impl_->verts[u].back());
  return out;
}

Word Sft::inv_word(const Word& w) const {
  Word r(w.rbegin(), w.rend());
  for (auto& l : r) l = impl_->alphabet.inv[l];
  return r;
}

bool Sft::point_allowed(const SymPoint& x, long lo, long hi) const {
  return word_allowed(x.window(lo, hi));
}

SymPoint Sft::reversal(const SymPoint& x) const {
  if (!impl_->involution) throw std::invalid_argument("subshift has no involution data");
  const auto inv = impl_->alphabet.inv;
  if (const auto* e = x.ep()) {
    auto sig_at = [&](long n) { return inv[x.at(-(n + 1))]; };
    const long off = -(e->offset + static_cast<long>(e->w.size()));
    const long pl = static_cast<long>(e->v.size());
    const long pr = static_cast<long>(e->u.size());
    Word u, w, v;
    for (long i = off - pl; i < off; ++i) u.push_back(sig_at(i));
    for (long i = off; i < off + static_cast<long>(e->w.size()); ++i) w.push_back(sig_at(i));
    for (long i = off + static_cast<long>(e->w.size());
         i < off + static_cast<long>(e->w.size()) + pr; ++i)
      v.push_back(sig_at(i));
    return SymPoint::eventually_periodic(std::move(u), std::move(w), std::move(v), off);
  }
  SymPoint base = x;
  return SymPoint::lazy([base, inv](long n) { return inv[base.at(-(n + 1))]; },
                        "sigma(" + x.label() + ")");
}

namespace {

/// Eventually periodic point from a letter function that is p_left-periodic on
/// (-inf, left_end] and p_right-periodic on [right_start, +inf).
SymPoint ep_from_fn(const std::function<int(long)>& f, long left_end, long p_left,
                    long right_start, long p_right) {
  const long off = left_end + 1;
  const long h = std::max(right_start, off);
  Word u, w, v;
  for (long i = off - p_left; i < off; ++i) u.push_back(f(i));
  for (long i = off; i < h; ++i) w.push_back(f(i));
  for (long i = h; i < h + p_right; ++i) v.push_back(f(i));
  return SymPoint::eventually_periodic(std::move(u), std::move(w), std::move(v), off);
}

/// Chain relation for the conjugate-fixed-point automaton: d -> d' allowed
/// when edge(d', d) and edge(F(d), F(d')).
struct PairGraph {
  std::vector<std::vector<int>> next;
  std::vector<int> fimg;  // F as a vertex map (or -1 when F(d) is not a vertex)
};

PairGraph build_pair_graph(const Sft& s) {
  const auto& verts = s.vertices();
  const int n = static_cast<int>(verts.size());
  PairGraph pg;
  pg.next.assign(n, {});
  pg.fimg.assign(n, -1);
  for (int d = 0; d < n; ++d) pg.fimg[d] = s.vertex_index(s.inv_word(verts[d]));
  auto has_edge = [&](int a, int b) {
    const auto& o = s.out_edges()[a];
    return std::find(o.begin(), o.end(), b) != o.end();
  };
  for (int d = 0; d < n; ++d) {
    if (pg.fimg[d] < 0) continue;
    for (int dp = 0; dp < n; ++dp) {
      if (pg.fimg[dp] < 0) continue;
      if (has_edge(dp, d) && has_edge(pg.fimg[d], pg.fimg[dp])) pg.next[d].push_back(dp);
    }
  }
  return pg;
}

/// Symmetric junction path w_0 = d0 -> ... -> w_L = F(d0) with
/// w_j = F(w_{L-j}); returns the path when it exists.
std::optional<std::vector<int>> junction_path(const Sft& s, const PairGraph& pg, int d0, int L) {
  std::vector<int> path{d0};
  std::function<bool()> dfs = [&]() {
    const int j = static_cast<int>(path.size()) - 1;
    if (j == L) return path.back() == pg.fimg[d0];
    for (int nxt : s.out_edges()[path.back()]) {
      // symmetry constraint couples position j+1 with L-(j+1)
      const int mirror = L - (j + 1);
      if (mirror < static_cast<int>(path.size())) {
        if (pg.fimg[path[mirror]] != nxt) continue;
      } else if (mirror == j + 1) {
        if (pg.fimg[nxt] != nxt) continue;  // self-mirrored middle vertex
      }
      path.push_back(nxt);
      if (dfs()) return true;
      path.pop_back();
    }
    return false;
  };
  if (pg.fimg[d0] < 0) return std::nullopt;
  if (dfs()) return path;
  return std::nullopt;
}

/// Shortest non-trivial (>= 1 step) path from -> to in the pair graph.
std::optional<std::vector<int>> pair_path(const PairGraph& pg, int from, int to) {
  const int n = static_cast<int>(pg.next.size());
  std::vector<int> par(n, -2);
  std::deque<int> q;
  for (int w : pg.next[from]) {
    if (par[w] == -2) {
      par[w] = -1;
      q.push_back(w);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (u == to) {
      std::vector<int> path{to};
      int cur = to;
      while (par[cur] != -1) {
        cur = par[cur];
        path.push_back(cur);
      }
      path.push_back(from);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int w : pg.next[u])
      if (par[w] == -2) {
        par[w] = u;
        q.push_back(w);
      }
  }
  return std::nullopt;
}

/// Backward chain d_0 -> d_1 -> ... reaching a cycle, when one exists.
std::optional<std::pair<std::vector<int>, int>> chain_to_cycle(const PairGraph& pg, int d0) {
  const int n = static_cast<int>(pg.next.size());
  std::vector<bool> reach(n, false);
  std::deque<int> q{d0};
  std::vector<int> order;
  reach[d0] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    order.push_back(u);
    for (int w : pg.next[u])
      if (!reach[w]) {
        reach[w] = true;
        q.push_back(w);
      }
  }
  for (int v : order) {
    auto cyc = pair_path(pg, v, v);
    if (!cyc) continue;
    std::vector<int> chain;
    if (v == d0) {
      chain.push_back(d0);
    } else {
      auto pre = pair_path(pg, d0, v);
      if (!pre) continue;
      chain = *pre;
    }
    const int cycle_start = static_cast<int>(chain.size()) - 1;
    chain.insert(chain.end(), cyc->begin() + 1, cyc->end() - 1);
    return std::make_pair(chain, cycle_start);
  }
  return std::nullopt;
}

/// Builds the conjugate-fixed witness from a junction path and a backward
/// chain: shift_kind 0 decides sigma(x) = x, 1 decides sigma(x) = phi(x).
SymPoint build_conj_witness(const Sft& s, const PairGraph& pg, const std::vector<int>& chain,
                            int cycle_start, const std::vector<int>& junction, int shift_kind) {
  const int m = s.memory();
  const long t = static_cast<long>(chain.size());
  const long p = t - cycle_start;
  auto d_at = [&](long k) {
    if (k < t) return chain[k];
    return chain[cycle_start + static_cast<int>((k - cycle_start) % p)];
  };
  // letters: x_i = vertex(i)[0]
  auto letter_at = [&, shift_kind](long i) -> int {
    int v;
    if (i <= -m)
      v = d_at(-i - m);  // v_{-k-m} = d_k
    else if (i >= shift_kind)
      v = pg.fimg[d_at(i - shift_kind)];  // c_k = F(d_k)
    else
      v = junction[i + m];  // middle vertices from the junction path
    return s.vertices()[v][0];
  };
  return ep_from_fn(letter_at, -m - std::max<long>(cycle_start, 1), p,
                    cycle_start + shift_kind, p);
}

std::optional<SymPoint> find_conj_fixed_point(const Sft& s, int shift_kind) {
  const PairGraph pg = build_pair_graph(s);
  const int L = s.memory() + shift_kind;
  for (int d0 = 0; d0 < static_cast<int>(s.vertices().size()); ++d0) {
    auto j = junction_path(s, pg, d0, L);
    if (!j) continue;
    auto chain = chain_to_cycle(pg, d0);
    if (!chain) continue;
    return build_conj_witness(s, pg, chain->first, chain->second, *j, shift_kind);
  }
  return std::nullopt;
}

}  // namespace

long Sft::separation_radius() const {
  if (impl_->sep_radius) return *impl_->sep_radius;
  const PairGraph pg = build_pair_graph(*this);
  const int n = static_cast<int>(impl_->verts.size());
  long k = 0;
  // longest chain from a junction-valid start; a reachable cycle would mean a
  // conjugate-fixed point exists
  for (int kind : {0, 1}) {
    std::vector<int> depth(n, -2);  // -2 unvisited, -1 in progress
    std::function<int(int)> longest = [&](int v) -> int {
      if (depth[v] == -1)
        throw std::runtime_error("pair graph has a cycle (fixed point exists)");
      if (depth[v] >= 0) return depth[v];
      depth[v] = -1;
      int best = 0;
      for (int u : pg.next[v]) best = std::max(best, 1 + longest(u));
      depth[v] = best;
      return best;
    };
    const int L = impl_->memory + kind;
    for (int d0 = 0; d0 < n; ++d0) {
      if (!junction_path(*this, pg, d0, L)) continue;
      k = std::max<long>(k, longest(d0));
    }
  }
  impl_->sep_radius = k + impl_->memory + 2;
  return *impl_->sep_radius;
}

std::vector<Clopen> invariant_clopen_pieces(const Sft& s) {
  const int n = static_cast<int>(s.vertices().size());
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int v = 0; v < n; ++v) {
    if (comp[v] >= 0) continue;
    std::deque<int> q{v};
    comp[v] = ncomp;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int w : s.out_edges()[u])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          q.push_back(w);
        }
      for (int w : s.in_edges()[u])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          q.push_back(w);
        }
    }
    ++ncomp;
  }
  std::vector<std::set<Word>> parts(ncomp);
  for (int v = 0; v < n; ++v) parts[comp[v]].insert(s.vertices()[v]);
  std::vector<Clopen> out;
  for (auto& p : parts) out.emplace_back(s, 0, std::move(p));
  return out;
}

bool is_irreducible(const Sft& s) {
  const int n = static_cast<int>(s.vertices().size());
  auto reach = [&](const std::vector<std::vector<int>>& adj) {
    std::vector<bool> seen(n, false);
    std::deque<int> q{0};
    seen[0] = true;
    int cnt = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int w : adj[u])
        if (!seen[w]) {
          seen[w] = true;
          ++cnt;
          q.push_back(w);
        }
    }
    return cnt == n;
  };
  return reach(s.out_edges()) && reach(s.in_edges());
}

CheckReport check_reversibility(const Sft& s, int samples, std::mt19937_64& rng) {
  CheckReport rep;
  if (!s.has_involution()) {
    rep.ok = false;
    rep.detail = "no involution data";
    return rep;
  }
  for (int i = 0; i < samples; ++i) {
    SymPoint x = random_ep_point(s, rng);
    if (!ep_equal(s.reversal(s.reversal(x)), x)) {
      rep.ok = false;
      rep.detail = "sigma^2 != id on a sampled point";
      rep.witness_point = x;
      return rep;
    }
    if (!ep_equal(s.reversal(s.reversal(x).shifted(1)), x.shifted(-1))) {
      rep.ok = false;
      rep.detail = "sigma phi sigma != phi^{-1} on a sampled point";
      rep.witness_point = x;
      return rep;
    }
  }
  if (auto w = find_conj_fixed_point(s, 0)) {
    rep.ok = false;
    rep.detail = "sigma has a fixed point";
    rep.witness_point = *w;
    return rep;
  }
  if (auto w = find_conj_fixed_point(s, 1)) {
    rep.ok = false;
    rep.detail = "sigma(x) = phi(x) has a solution";
    rep.witness_point = *w;
    return rep;
  }
  rep.detail = "pass: involution flips every orbit";
  return rep;
}

CheckReport check_topological_freeness(const Sft& s) {
  CheckReport rep;
  const int n = static_cast<int>(s.vertices().size());
  auto reach_set = [&](int start, const std::vector<std::vector<int>>& adj) {
    std::vector<bool> seen(n, false);
    std::deque<int> q{start};
    seen[start] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int w : adj[u])
        if (!seen[w]) {
          seen[w] = true;
          q.push_back(w);
        }
    }
    return seen;
  };
  for (int w = 0; w < n; ++w) {
    auto b = reach_set(w, s.in_edges());
    auto f = reach_set(w, s.out_edges());
    // edges usable by a path through w
    std::vector<int> odeg(n, 0), ideg(n, 0);
    int nverts = 0, nedges = 0;
    for (int v = 0; v < n; ++v)
      if (b[v] || f[v]) ++nverts;
    for (int u = 0; u < n; ++u) {
      for (int v : s.out_edges()[u]) {
        if (b[v] || f[u]) {
          ++odeg[u];
          ++ideg[v];
          ++nedges;
        }
      }
    }
    bool single_cycle = nedges == nverts;
    for (int v = 0; v < n && single_cycle; ++v) {
      if (b[v] || f[v]) single_cycle = odeg[v] == 1 && ideg[v] == 1;
    }
    if (single_cycle) {
      // connectivity: the usable graph is a disjoint union of cycles with all
      // degrees 1; it contains w, and every vertex reaches w or is reached, so
      // it is one cycle through w
      rep.ok = false;
      rep.detail = "all extensions of the witness word are periodic";
      rep.witness_word = s.vertices()[w];
      return rep;
    }
  }
  rep.detail = "pass: aperiodic points are dense";
  return rep;
}

std::vector<OrbitDescriptor> periodic_orbits_up_to(const Sft& s, int p) {
  std::vector<OrbitDescriptor> out;
  const int k = s.alphabet().size();
  for (int q = 1; q <= p; ++q) {
    Word w(q, 0);
    std::function<void(int)> gen = [&](int pos) {
      if (pos == q) {
        // primitive words only, canonical rotation representative
        for (int d = 1; d < q; ++d) {
          if (q % d) continue;
          bool power = true;
          for (int i = d; i < q && power; ++i) power = w[i] == w[i % d];
          if (power) return;
        }
        Word best = w;
        Word rot = w;
        for (int r = 1; r < q; ++r) {
          std::rotate(rot.begin(), rot.begin() + 1, rot.end());
          if (rot < best) best = rot;
        }
        if (best != w) return;
        SymPoint pt = SymPoint::periodic(w);
        if (s.point_allowed(pt, -s.memory() - q, s.memory() + 2 * q)) {
          OrbitDescriptor d;
          d.cycle = w;
          d.point = pt;
          out.push_back(std::move(d));
        }
        return;
      }
      for (int l = 0; l < k; ++l) {
        w[pos] = l;
        gen(pos + 1);
      }
    };
    gen(0);
  }
  return out;
}

namespace {

/// Cycles all of whose vertices have degree exactly 1 in the chosen direction.
std::vector<std::vector<int>> deterministic_cycles(const Sft& s, bool forward) {
  const auto& adj = forward ? s.out_edges() : s.in_edges();
  const int n = static_cast<int>(s.vertices().size());
  std::vector<std::vector<int>> cycles;
  std::vector<bool> used(n, false);
  for (int v = 0; v < n; ++v) {
    if (used[v] || adj[v].size() != 1) continue;
    std::vector<int> path{v};
    std::map<int, int> pos{{v, 0}};
    bool good = true;
    while (good) {
      int cur = path.back();
      if (adj[cur].size() != 1) {
        good = false;
        break;
      }
      int nxt = adj[cur].front();
      auto it = pos.find(nxt);
      if (it != pos.end()) {
        std::vector<int> cyc(path.begin() + it->second, path.end());
        if (!forward) std::reverse(cyc.begin(), cyc.end());  // store forward-oriented
        for (int u : cyc) used[u] = true;
        cycles.push_back(std::move(cyc));
        break;
      }
      pos[nxt] = static_cast<int>(path.size());
      path.push_back(nxt);
    }
  }
  return cycles;
}

bool orbit_equal(const SymPoint& a, const SymPoint& b, int span) {
  for (long k = -span; k <= span; ++k)
    if (ep_equal(a, b.shifted(k))) return true;
  return false;
}

}  // namespace

IsolatedReport isolated_orbits(const Sft& s, int radius) {
  IsolatedReport rep;
  auto dplus = deterministic_cycles(s, true);
  auto dminus = deterministic_cycles(s, false);
  if (dplus.empty() || dminus.empty()) {
    rep.exhaustive = true;
    rep.note = "no forward/backward deterministic cycles: no isolated points";
    return rep;
  }
  const int m = s.memory();
  std::vector<bool> on_minus(s.vertices().size(), false), on_plus(s.vertices().size(), false);
  for (const auto& c : dminus)
    for (int v : c) on_minus[v] = true;
  for (const auto& c : dplus)
    for (int v : c) on_plus[v] = true;

  auto word_of_cycle = [&](const std::vector<int>& cyc) {
    Word w;
    for (int v : cyc) w.push_back(s.vertices()[v][0]);
    return w;
  };

  // enumerate middle paths from D- cycles to D+ cycles, DFS bounded by radius
  std::vector<OrbitDescriptor> found;
  std::vector<int> path;
  std::function<void(int, int)> dfs = [&](int v, int depth) {
    if (static_cast<int>(found.size()) > 200) return;
    path.push_back(v);
    if (on_plus[v]) {
      // assemble the point: backward tail on the D- cycle through path[0],
      // middle = path, forward tail on the D+ cycle through v
      const std::vector<int>* cm = nullptr;
      for (const auto& c : dminus)
        if (std::find(c.begin(), c.end(), path[0]) != c.end()) cm = &c;
      const std::vector<int>* cp = nullptr;
      for (const auto& c : dplus)
        if (std::find(c.begin(), c.end(), v) != c.end()) cp = &c;
      if (cm && cp) {
        const long plen = static_cast<long>(path.size());
        const int start = static_cast<int>(std::find(cm->begin(), cm->end(), path[0]) - cm->begin());
        const int startp = static_cast<int>(std::find(cp->begin(), cp->end(), v) - cp->begin());
        const long pm = static_cast<long>(cm->size());
        const long pp = static_cast<long>(cp->size());
        auto fmod = [](long a, long m2) { long r = a % m2; return r < 0 ? r + m2 : r; };
        auto letter_at = [&](long i) -> int {
          int vx;
          if (i < 0)
            vx = (*cm)[fmod(start + i, pm)];
          else if (i < plen)
            vx = path[i];
          else
            vx = (*cp)[fmod(startp + i - (plen - 1), pp)];
          return s.vertices()[vx][0];
        };
        SymPoint pt = ep_from_fn(letter_at, -1, pm, plen - 1, pp);
        bool fresh = true;
        for (const auto& o : found)
          if (o.point && orbit_equal(*o.point, pt, 2 * radius + 2 * m + 8)) fresh = false;
        if (fresh && s.point_allowed(pt, -radius - 3 * m - static_cast<long>(pm),
                                     radius + 3 * m + static_cast<long>(pp))) {
          OrbitDescriptor d;
          d.point = pt;
          const long clo = -static_cast<long>(pm) - m;
          const long chi = plen + static_cast<long>(pp) + m;
          d.certificate = Clopen::cylinder(s, clo, pt.window(clo, chi));
          d.note = "isolating cylinder over [" + std::to_string(clo) + "," +
                   std::to_string(chi) + "]";
          found.push_back(std::move(d));
        }
      }
    }
    if (depth < radius) {
      for (int nx : s.out_edges()[v]) dfs(nx, depth + 1);
    }
    path.pop_back();
  };
  for (const auto& c : dminus)
    for (int v : c) dfs(v, 0);
  rep.orbits = std::move(found);
  // exhaustiveness: if the graph minus the deterministic cycles is acyclic,
  // middles have bounded length
  const int n = static_cast<int>(s.vertices().size());
  std::vector<int> color(n, 0);
  bool cyclic = false;
  std::function<void(int)> dfs2 = [&](int v) {
    color[v] = 1;
    for (int u : s.out_edges()[v]) {
      if (on_minus[u] || on_plus[u]) continue;
      if (color[u] == 1) cyclic = true;
      if (color[u] == 0 && !cyclic) dfs2(u);
    }
    color[v] = 2;
  };
  for (int v = 0; v < n; ++v)
    if (!color[v] && !on_minus[v] && !on_plus[v]) dfs2(v);
  rep.exhaustive = !cyclic && radius >= n + 2;
  rep.note = rep.exhaustive ? "middle paths exhausted" : "bounded search";
  return rep;
}

SymPoint random_ep_point(const Sft& s, std::mt19937_64& rng, int span) {
  const int n = static_cast<int>(s.vertices().size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  // random walk until a vertex repeats: transient + cycle, forward-oriented
  auto walk = [&](int start, bool forward) {
    std::vector<int> path{start};
    std::map<int, int> pos{{start, 0}};
    while (true) {
      const auto& adj = forward ? s.out_edges()[path.back()] : s.in_edges()[path.back()];
      std::uniform_int_distribution<std::size_t> e(0, adj.size() - 1);
      int nxt = adj[e(rng)];
      auto it = pos.find(nxt);
      if (it != pos.end()) return std::make_pair(path, it->second);
      pos[nxt] = static_cast<int>(path.size());
      path.push_back(nxt);
    }
  };
  // middle: random forward walk from a random vertex
  int v0 = pick(rng);
  std::vector<int> mid{v0};
  std::uniform_int_distribution<int> len(0, span);
  const int steps = len(rng);
  for (int i = 0; i < steps; ++i) {
    const auto& adj = s.out_edges()[mid.back()];
    std::uniform_int_distribution<std::size_t> e(0, adj.size() - 1);
    mid.push_back(adj[e(rng)]);
  }
  auto [bpath, bpos] = walk(v0, false);  // bpath[k] sits at index -k
  auto [fpath, fpos] = walk(mid.back(), true);
  const long bt = static_cast<long>(bpath.size());
  const long ft = static_cast<long>(fpath.size());
  const long pb = bt - bpos;
  const long pf = ft - fpos;
  const long mlen = static_cast<long>(mid.size());
  auto letter_at = [&, bpos = bpos, fpos = fpos](long i) -> int {
    int vx;
    if (i <= 0) {
      long k = -i;
      if (k >= bt) k = bpos + (k - bpos) % pb;
      vx = bpath[k];
    } else if (i < mlen) {
      vx = mid[i];
    } else {
      long k = i - (mlen - 1);
      if (k >= ft) k = fpos + (k - fpos) % pf;
      vx = fpath[k];
    }
    return s.vertices()[vx][0];
  };
  SymPoint pt = ep_from_fn(letter_at, -std::max<long>(bpos, 1), pb,
                           mlen - 1 + std::max<long>(fpos, 1), pf);
  if (!s.point_allowed(pt, -bt - 2 * pb - s.memory() - 2,
                       mlen + ft + 2 * pf + s.memory() + 2))
    throw std::logic_error("random_ep_point assembled an invalid point");
  return pt;
}

namespace {

/// Shared mutable state behind the transitive point's pure window oracle.
struct TransitiveState {
  Sft s;
  std::vector<int> tape;      // letters at indices 0, 1, 2, ...
  std::vector<int> tape_v;    // vertex index after each letter (same length)
  int target_len = 0;
  std::deque<Word> pending;   // targets of the current length not yet placed
  Word back_cycle;            // letters at negative indices, cyclically

  explicit TransitiveState(Sft sft) : s(std::move(sft)) {
    // seed with the lexicographically least vertex
    Word v0 = s.vertices().front();
    for (const auto& v : s.vertices())
      if (v < v0) v0 = v;
    for (int l : v0) tape.push_back(l);
    const int vi = s.vertex_index(v0);
    for (std::size_t i = 0; i < v0.size(); ++i) tape_v.push_back(vi);
    // negative side: shortest cycle ending at v0, lex-min among candidates
    back_cycle = find_back_cycle(vi);
  }

  Word find_back_cycle(int v0) {
    // BFS over in-edges from v0 until v0 recurs
    std::deque<std::vector<int>> q{{v0}};
    while (!q.empty()) {
      auto path = q.front();
      q.pop_front();
      if (path.size() > s.vertices().size() + 1) continue;
      for (int u : s.in_edges()[path.back()]) {
        if (u == v0) {
          Word w;
          for (auto it = path.rbegin(); it != path.rend(); ++it)
            w.push_back(s.vertices()[*it][0]);
          return w;  // letters of the cycle ... -> v0, in forward order
        }
        auto np = path;
        np.push_back(u);
        q.push_back(np);
      }
    }
    throw std::logic_error("trimmed graph vertex has no cycle through it");
  }

  bool tape_contains(const Word& t) {
    if (t.size() > tape.size()) return false;
    for (std::size_t i = 0; i + t.size() <= tape.size(); ++i)
      if (std::equal(t.begin(), t.end(), tape.begin() + i)) return true;
    return false;
  }

  void append_letter(int l) {
    const int cur = tape_v.back();
    for (int u : s.out_edges()[cur]) {
      if (s.vertices()[u].back() == l) {
        tape.push_back(l);
        tape_v.push_back(u);
        return;
      }
    }
    throw std::logic_error("transitive point: illegal letter appended");
  }

  void route_to(int target_vertex) {
    // BFS shortest path in the vertex graph
    const int n = static_cast<int>(s.vertices().size());
    std::vector<int> prev(n, -2);
    std::deque<int> q{tape_v.back()};
    prev[tape_v.back()] = -1;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      if (u == target_vertex && prev[u] != -1) break;
      for (int w : s.out_edges()[u]) {
        if (prev[w] == -2) {
          prev[w] = u;
          q.push_back(w);
        }
      }
    }
    std::vector<int> chain;
    int cur = target_vertex;
    if (tape_v.back() == target_vertex) return;
    if (prev[cur] == -2) throw std::logic_error("route_to: target unreachable");
    while (cur != -1 && prev[cur] != -1) {
      chain.push_back(cur);
      cur = prev[cur];
    }
    std::reverse(chain.begin(), chain.end());
    for (int v : chain) {
      tape.push_back(s.vertices()[v].back());
      tape_v.push_back(v);
    }
  }

  void place_target(const Word& t) {
    const int m = s.memory();
    if (static_cast<int>(t.size()) <= m) {
      // lex-min vertex containing t
      for (const auto& v : s.vertices()) {
        for (std::size_t j = 0; j + t.size() <= v.size(); ++j) {
          if (std::equal(t.begin(), t.end(), v.begin() + j)) {
            route_to(s.vertex_index(v));
            return;
          }
        }
      }
      return;  // not a factor: skip
    }
    Word head(t.begin(), t.begin() + m);
    const int hv = s.vertex_index(head);
    if (hv < 0 || !s.word_allowed(t)) return;
    route_to(hv);
    for (std::size_t i = m; i < t.size(); ++i) append_letter(t[i]);
  }

  void refill_targets() {
    ++target_len;
    Word w(target_len, 0);
    std::function<void(int)> gen = [&](int pos) {
      if (pos == target_len) {
        if (s.word_allowed(w)) pending.push_back(w);
        return;
      }
      for (int l = 0; l < s.alphabet().size(); ++l) {
        w[pos] = l;
        gen(pos + 1);
      }
    };
    gen(0);
  }

  void ensure(long upto) {
    while (static_cast<long>(tape.size()) <= upto) {
      if (pending.empty()) refill_targets();
      Word t = pending.front();
      pending.pop_front();
      if (!tape_contains(t)) place_target(t);
      if (pending.empty() && static_cast<long>(tape.size()) <= upto && target_len > 64)
        throw std::logic_error("transitive point generation stalled");
    }
  }
};

}  // namespace

SymPoint transitive_point(const Sft& s) {
  if (!is_irreducible(s)) throw std::invalid_argument("transitive point needs irreducibility");
  auto st = std::make_shared<TransitiveState>(s);
  return SymPoint::lazy(
      [st](long i) -> int {
        if (i >= 0) {
          st->ensure(i);
          return st->tape[i];
        }
        const long c = static_cast<long>(st->back_cycle.size());
        long r = i % c;
        if (r < 0) r += c;
        return st->back_cycle[r];
      },
      "transitive");
}

Sft build_reduced(InvAlphabet alphabet) {
  alphabet.check();
  if (!alphabet.has_involution() || alphabet.size() < 4 || alphabet.size() % 2 != 0 ||
      !alphabet.involution_fixed_point_free())
    throw std::invalid_argument(
        "reduced-word subshift needs an even alphabet of size >= 4 with a "
        "fixed-point-free involution");
  std::vector<Word> forbidden;
  for (int a = 0; a < alphabet.size(); ++a) forbidden.push_back({a, alphabet.inv[a]});
  return Sft::from_forbidden(std::move(alphabet), std::move(forbidden), true);
}

Sft build_doubling(const Sft& base) {
  const auto& a0 = base.alphabet();
  InvAlphabet a;
  const int k = a0.size();
  for (const auto& l : a0.letters) a.letters.push_back(l + "+");
  for (const auto& l : a0.letters) a.letters.push_back(l + "-");
  a.inv.resize(2 * k);
  for (int i = 0; i < k; ++i) {
    a.inv[i] = i + k;
    a.inv[i + k] = i;
  }
  const int m = base.memory();
  std::vector<Word> verts;
  std::vector<std::pair<int, int>> edges;
  const int nb = static_cast<int>(base.vertices().size());
  // copy 1: base vertices, tagged +; copy 2: reversed vertices, tagged -
  for (const auto& v : base.vertices()) verts.push_back(v);
  for (const auto& v : base.vertices()) {
    Word r(v.rbegin(), v.rend());
    for (auto& l : r) l += k;
    verts.push_back(std::move(r));
  }
  for (int u = 0; u < nb; ++u)
    for (int v : base.out_edges()[u]) {
      edges.emplace_back(u, v);
      edges.emplace_back(nb + v, nb + u);  // reversed edges on the second copy
    }
  (void)m;
  return Sft::from_graph(std::move(a), m, std::move(verts), std::move(edges), true);
}

}  // namespace flowline
