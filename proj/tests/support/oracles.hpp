#pragma once

// Independent reference implementations used to cross-check the library.
// Nothing here calls the structural or transcode algorithms under test.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "constabl/engine.hpp"
#include "constabl/parser.hpp"

#ifndef CONSTABL_MODELS_DIR
#error "CONSTABL_MODELS_DIR must be defined"
#endif

namespace oracle {

using namespace constabl;

inline std::string model_path(const std::string& name) { return std::string(CONSTABL_MODELS_DIR) + "/" + name; }

inline std::shared_ptr<const Program> load(const std::string& name) { return load_program(model_path(name)); }

inline Model parse_only(const std::string& name) {
  ParseResult r = parse_file(model_path(name));
  if (!r.ok()) throw std::runtime_error("cannot parse " + name);
  return std::move(*r.model);
}

/// Parent chain by repeated parent lookup on the raw state table.
inline std::vector<std::string> chain(const Model& m, const std::string& s) {
  std::vector<std::string> out;
  StateId cur = m.state_id(s);
  while (true) {
    std::optional<StateId> p;
    for (std::uint32_t i = 0; i < m.state_count(); ++i) {
      const auto& ch = m.state(StateId{i}).children;
      if (std::find(ch.begin(), ch.end(), cur) != ch.end()) p = StateId{i};
    }
    if (!p) break;
    out.push_back(m.state(*p).name);
    cur = *p;
  }
  return out;
}

/// Common strict ancestors of every state, as a name set.
inline std::set<std::string> common_ancestors(const Model& m, const std::vector<std::string>& ss) {
  std::set<std::string> acc;
  bool first = true;
  for (const auto& s : ss) {
    auto c = chain(m, s);
    std::set<std::string> cs(c.begin(), c.end());
    if (first) {
      acc = cs;
      first = false;
    } else {
      std::set<std::string> keep;
      for (const auto& x : acc) {
        if (cs.count(x)) keep.insert(x);
      }
      acc = keep;
    }
  }
  return acc;
}

/// Deepest element of the common ancestor set, found by chain length.
inline std::string closest_common_ancestor(const Model& m, const std::vector<std::string>& ss) {
  auto ca = common_ancestors(m, ss);
  std::string best;
  std::size_t depth = 0;
  for (const auto& a : ca) {
    std::size_t d = chain(m, a).size();
    if (best.empty() || d > depth) {
      best = a;
      depth = d;
    }
  }
  return best;
}

/// All interleavings of the given sequences that keep each sequence's order.
inline std::set<std::vector<std::string>> interleavings(const std::vector<std::vector<std::string>>& seqs) {
  std::set<std::vector<std::string>> out;
  std::vector<std::size_t> pos(seqs.size(), 0);
  std::vector<std::string> cur;
  std::function<void()> rec = [&] {
    bool any = false;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      if (pos[i] == seqs[i].size()) continue;
      any = true;
      cur.push_back(seqs[i][pos[i]++]);
      rec();
      --pos[i];
      cur.pop_back();
    }
    if (!any) out.insert(cur);
  };
  rec();
  return out;
}

struct Executed {
  CodeBlockId block;
  NodeId node;
  std::optional<bool> outcome;
};

/// Instruction and decision records of one step, in order.
inline std::vector<Executed> executed(const Program& p, const Trace& t, std::uint32_t step) {
  std::vector<Executed> out;
  for (const auto& r : t) {
    if (r.step != step || (r.kind != "instr" && r.kind != "decision")) continue;
    auto b = p.parse_label(r.block);
    if (!b) throw std::runtime_error("bad block label " + r.block);
    out.push_back({*b, *r.node, r.outcome});
  }
  return out;
}

inline std::vector<CodeBlockId> blocks_of(const Code& c) {
  if (c.kind == Code::Kind::leaf) return {c.block};
  std::vector<CodeBlockId> out;
  for (const auto& ch : c.children) {
    auto b = blocks_of(ch);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

/// Checks that `run` is a linear extension of the partial order of `code`:
/// every block runs one complete CFG path from entry to exit exactly once,
/// and for each Seq every record of an earlier child precedes every record of
/// a later child. Returns an empty string on success, else a reason.
inline std::string validate_linearization(const Program& p, const Code& code, const std::vector<Executed>& run) {
  std::map<CodeBlockId, std::vector<std::size_t>> positions;
  for (std::size_t i = 0; i < run.size(); ++i) positions[run[i].block].push_back(i);
  auto all = blocks_of(code);
  std::set<CodeBlockId> expected(all.begin(), all.end());
  if (expected.size() != all.size()) return "code lists a block twice";
  for (const auto& [b, pos] : positions) {
    if (!expected.count(b)) return "unexpected block " + p.label(b);
  }
  for (const CodeBlockId& b : all) {
    auto it = positions.find(b);
    if (it == positions.end()) return "block " + p.label(b) + " never ran";
    const Cfg& g = p.cfg(b);
    const auto& pos = it->second;
    if (run[pos.front()].node != g.entry) return "block " + p.label(b) + " did not start at its entry";
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const Executed& x = run[pos[k]];
      const CfgNode& n = g.node(x.node);
      bool last = k + 1 == pos.size();
      if (x.node == g.exit) {
        if (!last) return "block " + p.label(b) + " ran past its exit (repeated execution)";
        continue;
      }
      if (last) return "block " + p.label(b) + " stopped before its exit";
      NodeId next = run[pos[k + 1]].node;
      NodeId want;
      if (n.kind == CfgNode::Kind::decision) {
        if (!x.outcome) return "decision without outcome";
        want = *x.outcome ? n.then_succ : n.else_succ;
      } else {
        want = *n.succ;
      }
      if (next != want) return "block " + p.label(b) + " left program order";
    }
  }
  std::function<std::string(const Code&)> seq_check = [&](const Code& c) -> std::string {
    if (c.kind == Code::Kind::leaf) return "";
    for (const auto& ch : c.children) {
      auto r = seq_check(ch);
      if (!r.empty()) return r;
    }
    if (c.kind != Code::Kind::seq) return "";
    for (std::size_t i = 0; i + 1 < c.children.size(); ++i) {
      std::size_t last_before = 0;
      bool any = false;
      for (std::size_t a = 0; a <= i; ++a) {
        for (const auto& b : blocks_of(c.children[a])) {
          last_before = std::max(last_before, positions[b].back());
          any = true;
        }
      }
      for (const auto& b : blocks_of(c.children[i + 1])) {
        if (any && positions[b].front() < last_before) return "sequence order violated at " + p.label(b);
      }
    }
    return "";
  };
  return seq_check(code);
}

/// Shortest event sequences (by breadth-first search over all sequences up
/// to max_len) whose simulation ends in a state satisfying `goal`.
inline std::optional<std::vector<std::string>> bfs_shortest(
    std::shared_ptr<const Program> p, std::size_t max_len,
    const std::function<bool(const SimulationResult&)>& goal) {
  const auto& es = p->model().events();
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& seq : frontier) {
      RandomScheduler sched(0);
      SimulationResult r = simulate(p, seq, sched, {}, 0, false);
      if (goal(r)) return seq;
      for (const auto& e : es) {
        auto s = seq;
        s.push_back(e);
        next.push_back(std::move(s));
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace oracle
