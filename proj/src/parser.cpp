#include "constabl/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace constabl {

namespace {

enum class Tok {
  end,
  ident,
  integer,
  kw_statechart,
  kw_events,
  kw_state,
  kw_shell,
  kw_entry,
  kw_exit,
  kw_init,
  kw_transition,
  kw_on,
  kw_static,
  kw_local,
  kw_param,
  kw_int,
  kw_bool,
  kw_true,
  kw_false,
  kw_if,
  kw_else,
  kw_while,
  kw_skip,
  kw_and,
  kw_or,
  kw_not,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  semi,
  comma,
  colon,
  dot,
  arrow,
  assign,
  equals,
  plus,
  minus,
  star,
  slash,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  bang,
  error,
};

const std::map<std::string, Tok, std::less<>>& keywords() {
  static const std::map<std::string, Tok, std::less<>> kw = {
      {"statechart", Tok::kw_statechart}, {"events", Tok::kw_events},
      {"state", Tok::kw_state},           {"shell", Tok::kw_shell},
      {"entry", Tok::kw_entry},           {"exit", Tok::kw_exit},
      {"init", Tok::kw_init},             {"transition", Tok::kw_transition},
      {"on", Tok::kw_on},                 {"static", Tok::kw_static},
      {"local", Tok::kw_local},           {"param", Tok::kw_param},
      {"int", Tok::kw_int},               {"bool", Tok::kw_bool},
      {"true", Tok::kw_true},             {"false", Tok::kw_false},
      {"if", Tok::kw_if},                 {"else", Tok::kw_else},
      {"while", Tok::kw_while},           {"skip", Tok::kw_skip},
      {"and", Tok::kw_and},               {"or", Tok::kw_or},
      {"not", Tok::kw_not},
  };
  return kw;
}

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::int64_t value = 0;
  SourceLocation loc;
  SourceLocation end;
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_trivia();
    Token t;
    t.loc = here();
    if (pos_ >= src_.size()) {
      t.kind = Tok::end;
      t.end = t.loc;
      return t;
    }
    const auto c = static_cast<unsigned char>(src_[pos_]);
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      auto it = keywords().find(t.text);
      t.kind = it == keywords().end() ? Tok::ident : it->second;
    } else if (std::isdigit(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      t.kind = ec == std::errc() ? Tok::integer : Tok::error;
      if (t.kind == Tok::error) t.text = "integer literal out of range: " + t.text;
    } else {
      t.kind = punct(t.text);
    }
    t.end = here();
    return t;
  }

 private:
  SourceLocation here() const { return {line_, col_}; }

  void advance() {
    const auto c = static_cast<unsigned char>(src_[pos_]);
    ++pos_;
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((c & 0xC0) != 0x80) {
      // columns count code points, not UTF-8 continuation bytes
      ++col_;
    }
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
          advance();
        }
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
      } else {
        break;
      }
    }
  }

  Tok punct(std::string& text) {
    auto two = [&](char a, char b) {
      return src_[pos_] == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    struct Two {
      char a, b;
      Tok t;
    };
    static constexpr Two twos[] = {{'-', '>', Tok::arrow}, {':', '=', Tok::assign}, {'=', '=', Tok::eq},
                                   {'!', '=', Tok::ne},    {'<', '=', Tok::le},     {'>', '=', Tok::ge},
                                   {'&', '&', Tok::kw_and}, {'|', '|', Tok::kw_or}};
    for (const auto& tw : twos) {
      if (two(tw.a, tw.b)) {
        text = std::string{tw.a, tw.b};
        advance();
        advance();
        return tw.t;
      }
    }
    char c = src_[pos_];
    text = std::string(1, c);
    advance();
    switch (c) {
      case '{': return Tok::lbrace;
      case '}': return Tok::rbrace;
      case '(': return Tok::lparen;
      case ')': return Tok::rparen;
      case '[': return Tok::lbracket;
      case ']': return Tok::rbracket;
      case ';': return Tok::semi;
      case ',': return Tok::comma;
      case ':': return Tok::colon;
      case '=': return Tok::equals;
      case '.': return Tok::dot;
      case '+': return Tok::plus;
      case '-': return Tok::minus;
      case '*': return Tok::star;
      case '/': return Tok::slash;
      case '<': return Tok::lt;
      case '>': return Tok::gt;
      case '!': return Tok::bang;
      default: text = "unexpected character '" + text + "'"; return Tok::error;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

struct SyntaxError {
  SourceLocation loc;
  std::string code;
  std::string message;
};

struct RawName {
  std::string name;
  SourceSpan span;
};

struct RawTransition {
  RawName name;
  std::vector<RawName> source;
  std::vector<RawName> dest;
  RawName event;
  Expr guard = Expr::make_bool(true);
  Block action;
  SourceSpan span;
};

struct RawState {
  RawName name;
  bool shell = false;
  std::vector<VarDecl> vars;
  Block entry;
  Block exit;
  std::vector<RawState> children;
  std::vector<RawName> init;
  bool has_init = false;
  SourceLocation init_loc;
  std::vector<RawTransition> transitions;
  SourceSpan span;
};

class Parser {
 public:
  Parser(std::string_view text, bool predicate) : lex_(text), predicate_(predicate) { tok_ = lex_.next(); }

  RawState parse_model(std::vector<RawName>& events) {
    RawState root;
    SourceLocation begin = tok_.loc;
    expect(Tok::kw_statechart, "'statechart'");
    root.name = ident("model name");
    expect(Tok::lbrace, "'{'");
    if (accept(Tok::kw_events)) {
      events.push_back(ident("event name"));
      while (accept(Tok::comma)) events.push_back(ident("event name"));
      expect(Tok::semi, "';'");
    }
    parse_vars(root.vars);
    parse_state_body(root);
    expect(Tok::rbrace, "'}'");
    root.span = {begin, prev_end_};
    if (tok_.kind != Tok::end) fail("expected end of input");
    return root;
  }

  Expr parse_standalone_expr() {
    Expr e = expr();
    if (tok_.kind != Tok::end) fail("unexpected trailing input after expression");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::string code = "P001") {
    if (tok_.kind == Tok::error) throw SyntaxError{tok_.loc, "P001", tok_.text};
    throw SyntaxError{tok_.loc, std::move(code), msg + (tok_.kind == Tok::end ? " at end of input" : ", found '" + tok_.text + "'")};
  }

  void bump() {
    prev_end_ = tok_.end;
    tok_ = lex_.next();
  }

  bool accept(Tok k) {
    if (tok_.kind != k) return false;
    bump();
    return true;
  }

  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }

  RawName ident(const char* what) {
    if (tok_.kind != Tok::ident) fail(std::string("expected ") + what);
    RawName n{tok_.text, {tok_.loc, tok_.end}};
    bump();
    return n;
  }

  void parse_vars(std::vector<VarDecl>& out) {
    while (tok_.kind == Tok::kw_static || tok_.kind == Tok::kw_local || tok_.kind == Tok::kw_param) {
      VarDecl v;
      SourceLocation begin = tok_.loc;
      v.storage = tok_.kind == Tok::kw_static  ? StorageClass::static_
                  : tok_.kind == Tok::kw_local ? StorageClass::local
                                               : StorageClass::parameter;
      bump();
      v.name = ident("variable name").name;
      expect(Tok::colon, "':'");
      if (accept(Tok::kw_int)) {
        v.type = VarType::integer;
      } else if (accept(Tok::kw_bool)) {
        v.type = VarType::boolean;
      } else {
        fail("expected 'int' or 'bool'");
      }
      if (!accept(Tok::equals)) expect(Tok::assign, "'='");
      v.init = expr();
      expect(Tok::semi, "';'");
      v.span = {begin, prev_end_};
      out.push_back(std::move(v));
    }
  }

  void parse_state_body(RawState& s) {
    if (accept(Tok::kw_entry)) s.entry = block();
    if (accept(Tok::kw_exit)) s.exit = block();
    while (tok_.kind == Tok::kw_state) s.children.push_back(state());
    if (tok_.kind == Tok::kw_init) {
      s.has_init = true;
      s.init_loc = tok_.loc;
      bump();
      s.init.push_back(ident("state name"));
      while (accept(Tok::comma)) s.init.push_back(ident("state name"));
      expect(Tok::semi, "';'");
    }
    while (tok_.kind == Tok::kw_transition) s.transitions.push_back(transition());
  }

  RawState state() {
    RawState s;
    SourceLocation begin = tok_.loc;
    expect(Tok::kw_state, "'state'");
    s.name = ident("state name");
    if (accept(Tok::colon)) {
      expect(Tok::kw_shell, "'shell'");
      s.shell = true;
    }
    expect(Tok::lbrace, "'{'");
    parse_vars(s.vars);
    parse_state_body(s);
    expect(Tok::rbrace, "'}'");
    s.span = {begin, prev_end_};
    return s;
  }

  std::vector<RawName> qualified_id() {
    std::vector<RawName> path{ident("state name")};
    while (accept(Tok::dot)) path.push_back(ident("state name"));
    return path;
  }

  RawTransition transition() {
    RawTransition t;
    SourceLocation begin = tok_.loc;
    expect(Tok::kw_transition, "'transition'");
    t.name = ident("transition name");
    expect(Tok::colon, "':'");
    t.source = qualified_id();
    expect(Tok::arrow, "'->'");
    t.dest = qualified_id();
    expect(Tok::kw_on, "'on'");
    t.event = ident("event name");
    if (accept(Tok::lbracket)) {
      t.guard = expr();
      expect(Tok::rbracket, "']'");
    }
    if (accept(Tok::slash)) t.action = block();
    expect(Tok::semi, "';'");
    t.span = {begin, prev_end_};
    return t;
  }

  Block block() {
    expect(Tok::lbrace, "'{'");
    Block b;
    while (tok_.kind != Tok::rbrace) {
      if (tok_.kind == Tok::end) fail("expected '}'");
      b.push_back(stmt());
    }
    bump();
    return b;
  }

  Stmt stmt() {
    SourceLocation begin = tok_.loc;
    if (accept(Tok::kw_skip)) {
      expect(Tok::semi, "';'");
      return Stmt::make_skip({begin, prev_end_});
    }
    if (accept(Tok::kw_while)) {
      expect(Tok::lparen, "'('");
      Expr c = expr();
      expect(Tok::rparen, "')'");
      Block body = block();
      return Stmt::make_while(std::move(c), std::move(body), {begin, prev_end_});
    }
    if (accept(Tok::kw_if)) {
      expect(Tok::lparen, "'('");
      Expr c = expr();
      expect(Tok::rparen, "')'");
      Block then_b = block();
      Block else_b;
      if (accept(Tok::kw_else)) {
        if (tok_.kind == Tok::kw_if) {
          else_b.push_back(stmt());
        } else {
          else_b = block();
        }
      }
      return Stmt::make_if(std::move(c), std::move(then_b), std::move(else_b), {begin, prev_end_});
    }
    if (tok_.kind == Tok::ident) {
      std::string var = tok_.text;
      bump();
      expect(Tok::assign, "':='");
      Expr e = expr();
      expect(Tok::semi, "';'");
      return Stmt::make_assign(std::move(var), std::move(e), {begin, prev_end_});
    }
    fail("expected a statement");
  }

  // Precedence climbing: or < and < not < comparison < additive < multiplicative < unary.
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (tok_.kind == Tok::kw_or) {
      SourceLocation b = lhs.span.begin;
      bump();
      Expr rhs = and_expr();
      lhs = Expr::make_binary(BinaryOp::or_, std::move(lhs), std::move(rhs), {b, prev_end_});
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (tok_.kind == Tok::kw_and) {
      SourceLocation b = lhs.span.begin;
      bump();
      Expr rhs = not_expr();
      lhs = Expr::make_binary(BinaryOp::and_, std::move(lhs), std::move(rhs), {b, prev_end_});
    }
    return lhs;
  }

  Expr not_expr() {
    if (tok_.kind == Tok::kw_not) {
      SourceLocation b = tok_.loc;
      bump();
      Expr e = not_expr();
      return Expr::make_unary(UnaryOp::not_, std::move(e), {b, prev_end_});
    }
    return cmp_expr();
  }

  Expr cmp_expr() {
    Expr lhs = add_expr();
    std::optional<BinaryOp> op;
    switch (tok_.kind) {
      case Tok::eq: op = BinaryOp::eq; break;
      case Tok::ne: op = BinaryOp::ne; break;
      case Tok::lt: op = BinaryOp::lt; break;
      case Tok::le: op = BinaryOp::le; break;
      case Tok::gt: op = BinaryOp::gt; break;
      case Tok::ge: op = BinaryOp::ge; break;
      default: break;
    }
    if (!op) return lhs;
    SourceLocation b = lhs.span.begin;
    bump();
    Expr rhs = add_expr();
    return Expr::make_binary(*op, std::move(lhs), std::move(rhs), {b, prev_end_});
  }

  Expr add_expr() {
    Expr lhs = mul_expr();
    while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
      BinaryOp op = tok_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
      SourceLocation b = lhs.span.begin;
      bump();
      Expr rhs = mul_expr();
      lhs = Expr::make_binary(op, std::move(lhs), std::move(rhs), {b, prev_end_});
    }
    return lhs;
  }

  Expr mul_expr() {
    Expr lhs = unary_expr();
    while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
      BinaryOp op = tok_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
      SourceLocation b = lhs.span.begin;
      bump();
      Expr rhs = unary_expr();
      lhs = Expr::make_binary(op, std::move(lhs), std::move(rhs), {b, prev_end_});
    }
    return lhs;
  }

  Expr unary_expr() {
    SourceLocation b = tok_.loc;
    if (accept(Tok::minus)) {
      Expr e = unary_expr();
      return Expr::make_unary(UnaryOp::neg, std::move(e), {b, prev_end_});
    }
    if (accept(Tok::bang)) {
      Expr e = unary_expr();
      return Expr::make_unary(UnaryOp::not_, std::move(e), {b, prev_end_});
    }
    return primary();
  }

  Expr primary() {
    SourceLocation b = tok_.loc;
    switch (tok_.kind) {
      case Tok::integer: {
        std::int64_t v = tok_.value;
        bump();
        return Expr::make_int(v, {b, prev_end_});
      }
      case Tok::kw_true: bump(); return Expr::make_bool(true, {b, prev_end_});
      case Tok::kw_false: bump(); return Expr::make_bool(false, {b, prev_end_});
      case Tok::lparen: {
        bump();
        Expr e = expr();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::ident: {
        std::string name = tok_.text;
        bump();
        if (tok_.kind == Tok::lparen) return call(std::move(name), b);
        if (predicate_) {
          while (accept(Tok::dot)) name += "." + ident("variable name").name;
        }
        return Expr::make_var(std::move(name), {b, prev_end_});
      }
      default: fail("expected an expression");
    }
  }

  Expr call(std::string name, SourceLocation b) {
    std::optional<Builtin> fn;
    if (name == "min") fn = Builtin::min;
    if (name == "max") fn = Builtin::max;
    if (name == "abs") fn = Builtin::abs;
    if (predicate_ && name == "in") fn = Builtin::in_state;
    if (!fn) throw SyntaxError{b, "P012", "unknown function '" + name + "'"};
    expect(Tok::lparen, "'('");
    std::vector<Expr> args;
    if (*fn == Builtin::in_state) {
      RawName st = ident("state name");
      args.push_back(Expr::make_var(st.name, st.span));
    } else if (tok_.kind != Tok::rparen) {
      args.push_back(expr());
      while (accept(Tok::comma)) args.push_back(expr());
    }
    expect(Tok::rparen, "')'");
    return Expr::make_call(*fn, std::move(args), {b, prev_end_});
  }

  Lexer lex_;
  bool predicate_;
  Token tok_;
  SourceLocation prev_end_;
};

// Flattens the nested raw states into the Model tables and resolves names.
class Resolver {
 public:
  Resolver(std::string file, Diagnostics& diags) : file_(std::move(file)), diags_(diags) {}

  std::optional<Model> resolve(RawState& root, const std::vector<RawName>& raw_events) {
    for (const auto& ev : raw_events) {
      if (event_ids_.count(ev.name)) {
        error(ev.span.begin, "P004", "duplicate event '" + ev.name + "'");
        continue;
      }
      event_ids_[ev.name] = EventId{static_cast<std::uint32_t>(events_.size())};
      events_.push_back(ev.name);
    }

    flatten(root, std::nullopt);
    for (std::size_t i = 0; i < raw_.size(); ++i) resolve_state(StateId{static_cast<std::uint32_t>(i)});
    if (has_errors(diags_)) return std::nullopt;
    return Model(root.name.name, events_, std::move(states_), std::move(transitions_));
  }

 private:
  void error(SourceLocation loc, std::string code, std::string msg) {
    diags_.push_back({Severity::error, file_, loc, std::move(code), std::move(msg)});
  }

  StateId flatten(RawState& rs, std::optional<StateId> parent) {
    StateId id{static_cast<std::uint32_t>(states_.size())};
    State s;
    s.name = rs.name.name;
    s.parent = parent;
    s.vars = std::move(rs.vars);
    s.entry = std::move(rs.entry);
    s.exit = std::move(rs.exit);
    s.span = rs.span;
    if (!parent) {
      s.type = StateType::statechart;
    } else if (rs.shell) {
      s.type = StateType::shell;
    } else {
      s.type = rs.children.empty() ? StateType::atomic : StateType::composite;
    }
    if (!state_ids_.emplace(s.name, id).second) {
      error(rs.name.span.begin, "P002", "duplicate state name '" + s.name + "'");
    }
    states_.push_back(std::move(s));
    raw_.push_back(&rs);
    for (auto& child : rs.children) {
      StateId cid = flatten(child, id);
      states_[id.value].children.push_back(cid);
    }
    return id;
  }

  std::optional<StateId> resolve_path(const std::vector<RawName>& path) {
    auto it = state_ids_.find(path.front().name);
    if (it == state_ids_.end()) {
      error(path.front().span.begin, "P006", "unknown state '" + path.front().name + "'");
      return std::nullopt;
    }
    StateId cur = it->second;
    for (std::size_t i = 1; i < path.size(); ++i) {
      std::optional<StateId> next;
      for (StateId c : states_[cur.value].children) {
        if (states_[c.value].name == path[i].name) next = c;
      }
      if (!next) {
        error(path[i].span.begin, "P006",
              "'" + path[i].name + "' is not a substate of '" + states_[cur.value].name + "'");
        return std::nullopt;
      }
      cur = *next;
    }
    return cur;
  }

  void resolve_state(StateId id) {
    RawState& rs = *raw_[id.value];
    State& s = states_[id.value];
    const std::string kind = s.type == StateType::statechart ? "statechart" : "state";

    if (s.type == StateType::shell) {
      if (rs.has_init) {
        error(rs.init_loc, "P010", "shell state '" + s.name + "' takes all regions as initial; remove 'init'");
      }
      s.initial = s.children;
    } else if (s.type == StateType::atomic) {
      if (rs.has_init) error(rs.init_loc, "P010", "atomic state '" + s.name + "' cannot declare 'init'");
    } else if (!rs.has_init) {
      error(rs.span.begin, "P005", kind + " '" + s.name + "' must declare an initial child");
    } else if (rs.init.size() != 1) {
      error(rs.init_loc, "P009", kind + " '" + s.name + "' must declare exactly one initial child");
    } else {
      const RawName& n = rs.init.front();
      std::optional<StateId> child;
      for (StateId c : s.children) {
        if (states_[c.value].name == n.name) child = c;
      }
      if (!child) {
        error(n.span.begin, "P008", "initial state '" + n.name + "' is not a direct child of '" + s.name + "'");
      } else {
        s.initial.push_back(*child);
      }
    }

    for (auto& rt : rs.transitions) {
      Transition t;
      t.name = rt.name.name;
      t.parent = id;
      t.guard = std::move(rt.guard);
      t.action = std::move(rt.action);
      t.span = rt.span;
      auto src = resolve_path(rt.source);
      auto dst = resolve_path(rt.dest);
      auto ev = event_ids_.find(rt.event.name);
      if (ev == event_ids_.end()) {
        error(rt.event.span.begin, "P007", "undeclared event '" + rt.event.name + "'");
      }
      if (!transition_names_.insert(t.name).second) {
        error(rt.name.span.begin, "P003", "duplicate transition name '" + t.name + "'");
      }
      if (!src || !dst || ev == event_ids_.end()) continue;
      t.source = *src;
      t.dest = *dst;
      t.event = ev->second;
      TransitionId tid{static_cast<std::uint32_t>(transitions_.size())};
      transitions_.push_back(std::move(t));
      states_[id.value].transitions.push_back(tid);
    }
  }

  std::string file_;
  Diagnostics& diags_;
  std::vector<std::string> events_;
  std::map<std::string, EventId> event_ids_;
  std::vector<State> states_;
  std::vector<RawState*> raw_;
  std::map<std::string, StateId> state_ids_;
  std::vector<Transition> transitions_;
  std::set<std::string> transition_names_;
};

}  // namespace

ParseResult parse_model(std::string_view text, std::string file) {
  ParseResult result;
  std::vector<RawName> events;
  RawState root;
  try {
    Parser p(text, false);
    root = p.parse_model(events);
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({Severity::error, file, e.loc, e.code, e.message});
    return result;
  }
  Resolver r(file, result.diagnostics);
  result.model = r.resolve(root, events);
  return result;
}

ParseResult parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult r;
    r.diagnostics.push_back({Severity::error, path, {}, "P000", "cannot open file"});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

std::optional<Expr> parse_expression(std::string_view text, Diagnostics& diags, bool predicate) {
  try {
    Parser p(text, predicate);
    return p.parse_standalone_expr();
  } catch (const SyntaxError& e) {
    diags.push_back({Severity::error, "<expr>", e.loc, e.code, e.message});
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Pretty printing

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::binary:
      switch (e.binary_op) {
        case BinaryOp::or_: return 1;
        case BinaryOp::and_: return 2;
        case BinaryOp::eq:
        case BinaryOp::ne:
        case BinaryOp::lt:
        case BinaryOp::le:
        case BinaryOp::gt:
        case BinaryOp::ge: return 4;
        case BinaryOp::add:
        case BinaryOp::sub: return 5;
        case BinaryOp::mul:
        case BinaryOp::div: return 6;
      }
      return 0;
    case Expr::Kind::unary: return e.unary_op == UnaryOp::not_ ? 3 : 7;
    default: return 8;
  }
}

void emit(std::ostream& os, const Expr& e);

void emit_operand(std::ostream& os, const Expr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    os << '(';
    emit(os, e);
    os << ')';
  } else {
    emit(os, e);
  }
}

void emit(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::int_const: os << e.int_value; break;
    case Expr::Kind::bool_const: os << (e.bool_value ? "true" : "false"); break;
    case Expr::Kind::var: os << e.name; break;
    case Expr::Kind::unary:
      if (e.unary_op == UnaryOp::not_) {
        os << "not ";
        emit_operand(os, e.args[0], 3);
      } else {
        os << '-';
        // keep a nested minus from fusing with ours visually
        if (e.args[0].kind == Expr::Kind::unary && e.args[0].unary_op == UnaryOp::neg) {
          os << '(';
          emit(os, e.args[0]);
          os << ')';
        } else {
          emit_operand(os, e.args[0], 7);
        }
      }
      break;
    case Expr::Kind::binary: {
      int p = precedence(e);
      // comparisons are non-associative, so both sides need a strictly higher level
      bool cmp = p == 4;
      emit_operand(os, e.args[0], cmp ? p + 1 : p);
      os << ' ' << to_string(e.binary_op) << ' ';
      emit_operand(os, e.args[1], p + 1);
      break;
    }
    case Expr::Kind::call:
      os << to_string(e.builtin) << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        emit(os, e.args[i]);
      }
      os << ')';
      break;
  }
}

void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

void emit_block(std::ostream& os, const Block& b, int depth);

void emit_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  switch (s.kind) {
    case Stmt::Kind::skip: os << "skip;\n"; break;
    case Stmt::Kind::assign:
      os << s.var << " := ";
      emit(os, s.expr);
      os << ";\n";
      break;
    case Stmt::Kind::while_:
      os << "while (";
      emit(os, s.expr);
      os << ") ";
      emit_block(os, s.body, depth);
      os << '\n';
      break;
    case Stmt::Kind::if_:
      os << "if (";
      emit(os, s.expr);
      os << ") ";
      emit_block(os, s.body, depth);
      if (!s.else_body.empty()) {
        os << " else ";
        emit_block(os, s.else_body, depth);
      }
      os << '\n';
      break;
  }
}

void emit_block(std::ostream& os, const Block& b, int depth) {
  if (b.empty()) {
    os << "{}";
    return;
  }
  os << "{\n";
  for (const auto& s : b) emit_stmt(os, s, depth + 1);
  indent(os, depth);
  os << '}';
}

void emit_state_contents(std::ostream& os, const Model& m, const State& s, int depth);

void emit_state(std::ostream& os, const Model& m, StateId id, int depth) {
  const State& s = m.state(id);
  indent(os, depth);
  os << "state " << s.name << (s.type == StateType::shell ? " : shell" : "") << " {";
  std::ostringstream body;
  emit_state_contents(body, m, s, depth + 1);
  if (body.str().empty()) {
    os << "}\n";
  } else {
    os << '\n' << body.str();
    indent(os, depth);
    os << "}\n";
  }
}

void emit_state_contents(std::ostream& os, const Model& m, const State& s, int depth) {
  for (const auto& v : s.vars) {
    indent(os, depth);
    os << to_string(v.storage) << ' ' << v.name << ": " << to_string(v.type) << " = ";
    emit(os, v.init);
    os << ";\n";
  }
  if (!s.entry.empty()) {
    indent(os, depth);
    os << "entry ";
    emit_block(os, s.entry, depth);
    os << '\n';
  }
  if (!s.exit.empty()) {
    indent(os, depth);
    os << "exit ";
    emit_block(os, s.exit, depth);
    os << '\n';
  }
  for (StateId c : s.children) emit_state(os, m, c, depth);
  if (s.type == StateType::composite || s.type == StateType::statechart) {
    if (!s.initial.empty()) {
      indent(os, depth);
      os << "init " << m.state(s.initial.front()).name << ";\n";
    }
  }
  for (TransitionId tid : s.transitions) {
    const Transition& t = m.transition(tid);
    indent(os, depth);
    os << "transition " << t.name << " : " << m.state(t.source).name << " -> " << m.state(t.dest).name
       << " on " << m.event_name(t.event);
    if (!t.guard.is_true_literal()) {
      os << " [";
      emit(os, t.guard);
      os << ']';
    }
    if (!t.action.empty()) {
      os << " / ";
      emit_block(os, t.action, depth);
    }
    os << ";\n";
  }
}

}  // namespace

std::string to_source(const Expr& e) {
  std::ostringstream os;
  emit(os, e);
  return os.str();
}

std::string to_source(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::skip: return "skip";
    case Stmt::Kind::assign: return s.var + " := " + to_source(s.expr);
    default: {
      std::ostringstream os;
      emit_stmt(os, s, 0);
      std::string out = os.str();
      if (!out.empty() && out.back() == '\n') out.pop_back();
      return out;
    }
  }
}

std::string pretty_print(const Model& model) {
  std::ostringstream os;
  const State& root = model.state(model.root());
  os << "statechart " << root.name << " {\n";
  if (!model.events().empty()) {
    os << "  events ";
    for (std::size_t i = 0; i < model.events().size(); ++i) {
      if (i) os << ", ";
      os << model.events()[i];
    }
    os << ";\n";
  }
  emit_state_contents(os, model, root, 1);
  os << "}\n";
  return os.str();
}

}  // namespace constabl
