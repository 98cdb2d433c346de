#include "constabl/transcode.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace constabl {

namespace {

void render(std::ostream& os, const Model& m, const StateTree& t) {
  os << m.state(t.value).name;
  if (t.children.empty()) return;
  os << '(';
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i) os << ',';
    render(os, m, t.children[i]);
  }
  os << ')';
}

std::optional<StateTree> slice(const Model& m, StateId n, const std::set<StateId>& c) {
  StateTree t{n, {}};
  for (StateId ch : m.state(n).children) {
    if (auto sub = slice(m, ch, c)) t.children.push_back(std::move(*sub));
  }
  if (t.children.empty() && !c.count(n)) return std::nullopt;
  return t;
}

// The child of `top` on the way down to `s`, or s itself when it is a direct child.
StateId child_toward(const Model& m, StateId top, StateId s) {
  StateId cur = s;
  while (m.state(cur).parent && *m.state(cur).parent != top) cur = *m.state(cur).parent;
  return cur;
}

StateId transition_root(const Model& m, TransitionId tid, StateId end) {
  const Transition& t = m.transition(tid);
  StateId l = cca(m, {t.source, t.dest});
  return child_toward(m, l, end);
}

StateTree dest_path(const Model& m, StateId x, StateId d) {
  if (x == d) return initial_subtree(m, d);
  StateId next = child_toward(m, x, d);
  StateTree t{x, {}};
  if (m.state(x).type == StateType::shell) {
    for (StateId ch : m.state(x).children) {
      t.children.push_back(ch == next ? dest_path(m, next, d) : initial_subtree(m, ch));
    }
  } else {
    t.children.push_back(dest_path(m, next, d));
  }
  return t;
}

}  // namespace

std::string to_string(const Model& model, const StateTree& t) {
  std::ostringstream os;
  render(os, model, t);
  return os.str();
}

StateTree subtree(const Model& model, StateId n) {
  StateTree t{n, {}};
  for (StateId ch : model.state(n).children) t.children.push_back(subtree(model, ch));
  return t;
}

StateTree sliced_subtree(const Model& model, StateId n, const StateSet& c) {
  auto t = slice(model, n, std::set<StateId>(c.begin(), c.end()));
  if (!t) throw EmptySliceError("no member of the configuration lies under '" + model.state(n).name + "'");
  return *t;
}

StateTree initial_subtree(const Model& model, StateId n) {
  StateTree t{n, {}};
  for (StateId ch : model.state(n).initial) t.children.push_back(initial_subtree(model, ch));
  return t;
}

StateTree cst(const Model& model, const StateSet& c) { return sliced_subtree(model, model.root(), c); }

std::set<StateId> cst_states(const Model& model, const StateSet& c) {
  std::set<StateId> out;
  for (StateId s : c) {
    out.insert(s);
    for (StateId a : ancestors(model, s)) out.insert(a);
  }
  return out;
}

StateTree source_state_tree(const Model& model, TransitionId t, const StateSet& c) {
  const Transition& tr = model.transition(t);
  if (!cst_states(model, c).count(tr.source)) {
    throw NotEnabledError("source of '" + tr.name + "' is not active in the configuration");
  }
  return sliced_subtree(model, transition_root(model, t, tr.source), c);
}

StateTree dest_state_tree(const Model& model, TransitionId t) {
  const Transition& tr = model.transition(t);
  return dest_path(model, transition_root(model, t, tr.dest), tr.dest);
}

CfgTree cfg_tree_source(const Program& program, TransitionId t, const StateSet& c) {
  return treemap(source_state_tree(program.model(), t, c), [](StateId s) { return CodeBlockId::exit_of(s); });
}

CfgTree cfg_tree_dest(const Program& program, TransitionId t) {
  return treemap(dest_state_tree(program.model(), t), [](StateId s) { return CodeBlockId::entry_of(s); });
}

Code Code::seq(std::vector<Code> parts) {
  Code out;
  out.kind = Kind::seq;
  for (auto& p : parts) {
    if (p.kind == Kind::seq) {
      for (auto& ch : p.children) out.children.push_back(std::move(ch));
    } else {
      out.children.push_back(std::move(p));
    }
  }
  return out;
}

Code Code::conc(std::vector<Code> parts) {
  Code out;
  out.kind = Kind::conc;
  out.children = std::move(parts);
  return out;
}

Code code_of(const CfgTree& t) {
  if (t.children.empty()) return Code::leaf(t.value);
  if (t.children.size() == 1) return Code::seq({Code::leaf(t.value), code_of(t.children.front())});
  std::vector<Code> parts;
  for (const auto& ch : t.children) parts.push_back(code_of(ch));
  return Code::seq({Code::leaf(t.value), Code::conc(std::move(parts))});
}

Code rev(const Code& c) {
  if (c.kind == Code::Kind::leaf) return c;
  Code out;
  out.kind = c.kind;
  for (const auto& ch : c.children) out.children.push_back(rev(ch));
  if (c.kind == Code::Kind::seq) std::reverse(out.children.begin(), out.children.end());
  return out;
}

Code transition_code(const Program& program, TransitionId t, const StateSet& c) {
  // Source exits run innermost first, destination entries outermost first.
  return Code::seq({rev(code_of(cfg_tree_source(program, t, c))), Code::leaf(CodeBlockId::action_of(t)),
                    code_of(cfg_tree_dest(program, t))});
}

namespace {

void collect_blocks(const Code& c, std::vector<CodeBlockId>& out) {
  if (c.kind == Code::Kind::leaf) {
    out.push_back(c.block);
    return;
  }
  for (const auto& ch : c.children) collect_blocks(ch, out);
}

std::vector<CodeBlockId> intersect(std::vector<CodeBlockId> a, std::vector<CodeBlockId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<CodeBlockId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<CodeBlockId> code_blocks(const Code& c) {
  std::vector<CodeBlockId> out;
  collect_blocks(c, out);
  return out;
}

std::vector<CodeBlockId> shared_blocks(const Program& program, TransitionId t1, TransitionId t2,
                                       const StateSet& c) {
  return intersect(code_blocks(transition_code(program, t1, c)), code_blocks(transition_code(program, t2, c)));
}

bool conflict(const Program& program, TransitionId t1, TransitionId t2, const StateSet& c) {
  return !shared_blocks(program, t1, t2, c).empty();
}

Code step_code(const Program& program, std::vector<TransitionId> ts, const StateSet& c) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<Code> codes;
  std::vector<std::vector<CodeBlockId>> blocks;
  for (TransitionId t : ts) {
    codes.push_back(transition_code(program, t, c));
    blocks.push_back(code_blocks(codes.back()));
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      auto shared = intersect(blocks[i], blocks[j]);
      if (shared.empty()) continue;
      std::string msg = "transitions '" + program.model().transition(ts[i]).name + "' and '" +
                        program.model().transition(ts[j]).name + "' conflict on";
      for (const auto& b : shared) msg += " " + program.label(b);
      throw ConflictError(msg, ts[i], ts[j], std::move(shared));
    }
  }
  if (codes.empty()) return Code{};
  if (codes.size() == 1) return std::move(codes.front());
  return Code::conc(std::move(codes));
}

namespace {

void print_code(std::ostream& os, const Program& p, const Code& c, int depth) {
  if (c.kind == Code::Kind::leaf) {
    os << p.short_label(c.block);
    return;
  }
  const bool seq = c.kind == Code::Kind::seq;
  const char* sep = seq ? (depth == 0 ? ", " : ",") : (depth == 0 ? " | " : "|");
  os << (seq ? "\xE2\x9F\xA8" : "[");
  for (std::size_t i = 0; i < c.children.size(); ++i) {
    if (i) os << sep;
    print_code(os, p, c.children[i], depth + 1);
  }
  os << (seq ? "\xE2\x9F\xA9" : "]");
}

std::size_t code_leaf_count(const Code& c) {
  if (c.kind == Code::Kind::leaf) return 1;
  std::size_t n = 0;
  for (const auto& ch : c.children) n += code_leaf_count(ch);
  return n;
}

}  // namespace

std::string to_string(const Program& program, const Code& c) {
  std::ostringstream os;
  print_code(os, program, c, 0);
  return os.str();
}

CodeNavigator::CodeNavigator(const Program& program, Code code) : program_(&program), code_(std::move(code)) {
  leaves_ = code_blocks(code_);
  branch_.assign(leaves_.size(), 0);
  next_.assign(leaves_.size(), {});
  pred_.assign(leaves_.size(), {});
  if (code_.kind == Code::Kind::conc) {
    std::uint32_t base = 0;
    for (std::uint32_t b = 0; b < code_.children.size(); ++b) {
      std::size_t n = code_leaf_count(code_.children[b]);
      for (std::size_t k = 0; k < n; ++k) branch_[base + k] = b;
      base += static_cast<std::uint32_t>(n);
    }
  }
  link(code_, 0, {});
  for (std::uint32_t i = 0; i < next_.size(); ++i) {
    for (std::uint32_t j : next_[i]) pred_[j].push_back(i);
  }
  for (std::uint32_t i = 0; i < leaves_.size(); ++i) leaf_of_block_.emplace(leaves_[i], i);
}

std::vector<std::uint32_t> CodeNavigator::first_of(const Code& c, std::uint32_t base) const {
  switch (c.kind) {
    case Code::Kind::leaf: return {base};
    case Code::Kind::seq: return c.children.empty() ? std::vector<std::uint32_t>{} : first_of(c.children.front(), base);
    case Code::Kind::conc: {
      std::vector<std::uint32_t> out;
      for (const auto& ch : c.children) {
        auto f = first_of(ch, base);
        out.insert(out.end(), f.begin(), f.end());
        base += static_cast<std::uint32_t>(code_leaf_count(ch));
      }
      return out;
    }
  }
  return {};
}

void CodeNavigator::link(const Code& c, std::uint32_t base, const std::vector<std::uint32_t>& after) {
  switch (c.kind) {
    case Code::Kind::leaf: next_[base] = after; return;
    case Code::Kind::conc:
      for (const auto& ch : c.children) {
        link(ch, base, after);
        base += static_cast<std::uint32_t>(code_leaf_count(ch));
      }
      return;
    case Code::Kind::seq: {
      // Walk right to left so each child knows what starts after it.
      std::vector<std::uint32_t> bases(c.children.size());
      std::uint32_t b = base;
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        bases[i] = b;
        b += static_cast<std::uint32_t>(code_leaf_count(c.children[i]));
      }
      std::vector<std::uint32_t> follow = after;
      for (std::size_t i = c.children.size(); i-- > 0;) {
        link(c.children[i], bases[i], follow);
        auto f = first_of(c.children[i], bases[i]);
        if (!f.empty()) follow = std::move(f);
      }
      return;
    }
  }
}

std::vector<ControlPoint> CodeNavigator::first() const {
  std::vector<ControlPoint> out;
  for (std::uint32_t l : first_of(code_, 0)) out.push_back(entry_point(l));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ControlPoint> CodeNavigator::next_cp(ControlPoint cp,
                                                 const std::function<bool(const CfgNode&)>& decide) const {
  const CfgNode& n = node(cp);
  if (is_exit(cp)) {
    std::vector<ControlPoint> out;
    for (std::uint32_t l : next_cfg_codes(cp.leaf)) out.push_back(entry_point(l));
    return out;
  }
  if (n.kind == CfgNode::Kind::decision) return {{cp.leaf, decide(n) ? n.then_succ : n.else_succ}};
  return {{cp.leaf, *n.succ}};
}

std::string CodeNavigator::label(ControlPoint cp) const {
  return program_->label(leaves_.at(cp.leaf)) + "#" + std::to_string(cp.node);
}

std::optional<ControlPoint> CodeNavigator::parse(std::string_view text) const {
  auto hash = text.rfind('#');
  if (hash == std::string_view::npos) return std::nullopt;
  auto block = program_->parse_label(text.substr(0, hash));
  if (!block) return std::nullopt;
  auto it = leaf_of_block_.find(*block);
  if (it == leaf_of_block_.end()) return std::nullopt;
  std::string_view num = text.substr(hash + 1);
  NodeId node = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), node);
  if (ec != std::errc() || ptr != num.data() + num.size()) return std::nullopt;
  if (node >= cfg(it->second).nodes.size()) return std::nullopt;
  return ControlPoint{it->second, node};
}

}  // namespace constabl
