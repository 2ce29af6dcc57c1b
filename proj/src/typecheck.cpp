#include "rb1/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace rb1 {

// ---------------------------------------------------------------------------
// TypeTable / TypedModule

TypeTable::TypeTable() {
  types_.push_back({TypeInfo::Kind::Void});
  types_.push_back({TypeInfo::Kind::Bool});
  types_.push_back({TypeInfo::Kind::Int});
  types_.push_back({TypeInfo::Kind::Float});
}

TypeId TypeTable::intern(const TypeInfo& info) {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == info) return static_cast<TypeId>(i);
  }
  types_.push_back(info);
  return static_cast<TypeId>(types_.size() - 1);
}

TypeId TypeTable::bounded(std::int64_t min, std::int64_t max) {
  TypeInfo t{TypeInfo::Kind::Bounded};
  t.min = min;
  t.max = max;
  return intern(t);
}

TypeId TypeTable::array(TypeId elem, std::int64_t len) {
  TypeInfo t{TypeInfo::Kind::Array};
  t.elem = elem;
  t.len = len;
  return intern(t);
}

TypeId TypeTable::class_type(int class_index) {
  TypeInfo t{TypeInfo::Kind::Class};
  t.class_index = class_index;
  return intern(t);
}

const FieldInfo* ClassInfo::field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

int ClassInfo::method_index(std::string_view n) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int ActInfo::action_index(std::string_view n) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

std::int64_t TypedModule::slot_count(TypeId id) const {
  const TypeInfo& t = types[id];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return 0;
    case TypeInfo::Kind::Array: return t.len * slot_count(t.elem);
    case TypeInfo::Kind::Class: return classes[static_cast<std::size_t>(t.class_index)].slots;
    default: return 1;
  }
}

std::int64_t TypedModule::byte_size(TypeId id) const {
  const TypeInfo& t = types[id];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return 0;
    case TypeInfo::Kind::Bool: return 1;
    case TypeInfo::Kind::Array: return t.len * byte_size(t.elem);
    case TypeInfo::Kind::Class: return classes[static_cast<std::size_t>(t.class_index)].bytes;
    default: return 8;
  }
}

std::string TypedModule::type_name(TypeId id) const {
  const TypeInfo& t = types[id];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return "Void";
    case TypeInfo::Kind::Bool: return "Bool";
    case TypeInfo::Kind::Int: return "Int";
    case TypeInfo::Kind::Float: return "Float";
    case TypeInfo::Kind::Bounded: return "Int<" + std::to_string(t.min) + ", " + std::to_string(t.max) + ">";
    case TypeInfo::Kind::Array: {
      // Print dimensions outermost first, matching source syntax.
      std::string dims;
      TypeId cur = id;
      while (types[cur].kind == TypeInfo::Kind::Array) {
        dims += "[" + std::to_string(types[cur].len) + "]";
        cur = types[cur].elem;
      }
      return type_name(cur) + dims;
    }
    case TypeInfo::Kind::Class: return classes[static_cast<std::size_t>(t.class_index)].name;
  }
  return "?";
}

int TypedModule::find_act(std::string_view name) const {
  for (std::size_t i = 0; i < ast.actions.size(); ++i) {
    if (ast.actions[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int TypedModule::find_function(std::string_view name) const {
  for (std::size_t i = 0; i < ast.functions.size(); ++i) {
    if (ast.functions[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int TypedModule::find_class(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int TypedModule::act_of_class(int class_index) const {
  const ClassInfo& c = classes.at(static_cast<std::size_t>(class_index));
  return c.origin == ClassInfo::Origin::SynthesizedFromAct ? c.decl_index : -1;
}

const std::vector<BuiltinInfo>& builtins() {
  static const std::vector<BuiltinInfo> table = {
      {"float", {TypeTable::kInt}, TypeTable::kFloat},
      {"int", {TypeTable::kFloat}, TypeTable::kInt},
      {"abs", {TypeTable::kInt}, TypeTable::kInt},
      {"min", {TypeTable::kInt, TypeTable::kInt}, TypeTable::kInt},
      {"max", {TypeTable::kInt, TypeTable::kInt}, TypeTable::kInt},
  };
  return table;
}

// ---------------------------------------------------------------------------
// AST walking helpers

namespace {

template <typename F>
void visit_exprs(Expr& e, const F& f) {
  f(e);
  for (Expr& c : e.operands) visit_exprs(c, f);
}

template <typename F>
void visit_stmt_exprs(std::vector<Stmt>& body, const F& f) {
  for (Stmt& s : body) {
    if (s.value) visit_exprs(*s.value, f);
    if (s.target) visit_exprs(*s.target, f);
    for (Expr& p : s.preconditions) visit_exprs(p, f);
    visit_stmt_exprs(s.body, f);
    visit_stmt_exprs(s.else_body, f);
  }
}

template <typename F>
void visit_const_exprs(const Expr& e, const F& f) {
  f(e);
  for (const Expr& c : e.operands) visit_const_exprs(c, f);
}

template <typename F>
void visit_const_stmts(const std::vector<Stmt>& body, const F& f) {
  for (const Stmt& s : body) {
    f(s);
    visit_const_stmts(s.body, f);
    visit_const_stmts(s.else_body, f);
  }
}

void collect_type_names(const TypeExpr& t, std::set<std::string>& out) {
  if (t.base == TypeExpr::Base::Named) out.insert(t.name);
}

}  // namespace

// ---------------------------------------------------------------------------
// order_actions

std::vector<int> order_actions(const ModuleAst& module) {
  std::map<std::string, int> act_by_name, act_by_class, class_by_name, fn_by_name;
  for (std::size_t i = 0; i < module.actions.size(); ++i) {
    act_by_name[module.actions[i].name] = static_cast<int>(i);
    act_by_class[module.actions[i].return_class] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < module.classes.size(); ++i) class_by_name[module.classes[i].name] = static_cast<int>(i);
  for (std::size_t i = 0; i < module.functions.size(); ++i) fn_by_name[module.functions[i].name] = static_cast<int>(i);

  auto signature_names = [](const FuncDecl& f) {
    std::set<std::string> names;
    for (const Param& p : f.params) collect_type_names(p.type, names);
    if (f.ret) collect_type_names(*f.ret, names);
    return names;
  };

  // Acts reachable from a type name, following declared class fields and
  // method signatures.
  std::function<void(const std::string&, std::set<int>&, std::set<std::string>&)> acts_of_type;
  acts_of_type = [&](const std::string& name, std::set<int>& out, std::set<std::string>& seen) {
    if (!seen.insert(name).second) return;
    if (auto it = act_by_class.find(name); it != act_by_class.end()) {
      out.insert(it->second);
      return;
    }
    auto it = class_by_name.find(name);
    if (it == class_by_name.end()) return;
    const ClsDecl& c = module.classes[static_cast<std::size_t>(it->second)];
    std::set<std::string> names;
    for (const FieldDecl& f : c.fields) collect_type_names(f.type, names);
    for (const FuncDecl& m : c.methods) {
      auto sig = signature_names(m);
      names.insert(sig.begin(), sig.end());
    }
    for (const auto& n : names) acts_of_type(n, out, seen);
  };

  std::vector<std::set<int>> deps(module.actions.size());
  for (std::size_t i = 0; i < module.actions.size(); ++i) {
    const ActDecl& a = module.actions[i];
    std::set<std::string> type_names;
    std::set<std::string> called;
    for (const Param& p : a.params) collect_type_names(p.type, type_names);
    visit_const_stmts(a.body, [&](const Stmt& s) {
      if (s.declared) collect_type_names(*s.declared, type_names);
      for (const Param& p : s.params) collect_type_names(p.type, type_names);
      auto on_expr = [&](const Expr& e) {
        if (e.kind == ExprKind::Call) called.insert(e.name);
      };
      if (s.value) visit_const_exprs(*s.value, on_expr);
      if (s.target) visit_const_exprs(*s.target, on_expr);
      for (const Expr& p : s.preconditions) visit_const_exprs(p, on_expr);
    });
    std::set<int>& d = deps[i];
    std::set<std::string> seen;
    for (const auto& n : type_names) acts_of_type(n, d, seen);
    for (const auto& c : called) {
      if (auto it = fn_by_name.find(c); it != fn_by_name.end()) {
        for (const auto& n : signature_names(module.functions[static_cast<std::size_t>(it->second)])) {
          acts_of_type(n, d, seen);
        }
      } else if (auto jt = act_by_name.find(c); jt != act_by_name.end()) {
        d.insert(jt->second);
      }
    }
  }

  std::vector<int> order;
  std::vector<int> state(module.actions.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<int> stack;
  std::function<void(int)> visit = [&](int a) {
    state[static_cast<std::size_t>(a)] = 1;
    stack.push_back(a);
    for (int d : deps[static_cast<std::size_t>(a)]) {
      if (state[static_cast<std::size_t>(d)] == 1) {
        auto from = std::find(stack.begin(), stack.end(), d);
        std::vector<std::string> cycle;
        for (auto it = from; it != stack.end(); ++it) cycle.push_back(module.actions[static_cast<std::size_t>(*it)].name);
        throw ActionCycleError(module.actions[static_cast<std::size_t>(d)].pos, std::move(cycle));
      }
      if (state[static_cast<std::size_t>(d)] == 0) visit(d);
    }
    stack.pop_back();
    state[static_cast<std::size_t>(a)] = 2;
    order.push_back(a);
  };
  for (std::size_t i = 0; i < module.actions.size(); ++i) {
    if (state[i] == 0) visit(static_cast<int>(i));
  }
  return order;
}

// ---------------------------------------------------------------------------
// Checker

namespace {

struct Var {
  std::string name;
  TypeId type;
  Resolution::Kind root;
  std::int64_t offset;
};

class Checker {
 public:
  explicit Checker(TypedModule& tm) : tm_(tm), types_(tm.types) {}

  void run() {
    declare_classes();
    resolve_signatures();
    tm_.action_order = order_actions(tm_.ast);
    for (int a : tm_.action_order) check_act(a);
    for (std::size_t c = 0; c < tm_.classes.size(); ++c) {
      if (tm_.classes[c].origin == ClassInfo::Origin::Declared) ensure_layout(static_cast<int>(c), {});
    }
    for (std::size_t i = 0; i < tm_.ast.functions.size(); ++i) {
      check_function(tm_.ast.functions[i], tm_.functions[i], -1);
    }
    for (std::size_t c = 0; c < tm_.ast.classes.size(); ++c) {
      int ci = class_of_decl_[c];
      for (std::size_t m = 0; m < tm_.ast.classes[c].methods.size(); ++m) {
        check_function(tm_.ast.classes[c].methods[m], tm_.classes[static_cast<std::size_t>(ci)].methods[m], ci);
      }
    }
    compute_purity();
    for (const Expr* p : preconditions_) check_pure(*p);
  }

 private:
  // -- declarations ---------------------------------------------------------

  void declare_classes() {
    auto& ast = tm_.ast;
    for (std::size_t i = 0; i < ast.classes.size(); ++i) {
      ClassInfo c;
      c.name = ast.classes[i].name;
      c.origin = ClassInfo::Origin::Declared;
      c.decl_index = static_cast<int>(i);
      class_of_decl_.push_back(add_class(std::move(c)));
    }
    tm_.acts.resize(ast.actions.size());
    for (std::size_t i = 0; i < ast.actions.size(); ++i) {
      const ActDecl& a = ast.actions[i];
      ClassInfo c;
      c.name = a.return_class;
      c.origin = ClassInfo::Origin::SynthesizedFromAct;
      c.decl_index = static_cast<int>(i);
      tm_.acts[i].decl_index = static_cast<int>(i);
      tm_.acts[i].class_index = add_class(std::move(c));
    }
  }

  int add_class(ClassInfo c) {
    int idx = static_cast<int>(tm_.classes.size());
    tm_.classes.push_back(std::move(c));
    tm_.classes.back().type = types_.class_type(idx);
    return idx;
  }

  TypeId resolve(const TypeExpr& t) {
    TypeId base = kNoType;
    switch (t.base) {
      case TypeExpr::Base::Bool: base = TypeTable::kBool; break;
      case TypeExpr::Base::Int: base = TypeTable::kInt; break;
      case TypeExpr::Base::Float: base = TypeTable::kFloat; break;
      case TypeExpr::Base::Bounded:
        if (t.min > t.max) throw TypeError(t.pos, "bounded integer requires min <= max");
        base = types_.bounded(t.min, t.max);
        break;
      case TypeExpr::Base::Named: {
        int ci = tm_.find_class(t.name);
        if (ci < 0) throw TypeError(t.pos, "unknown type '" + t.name + "'");
        base = tm_.classes[static_cast<std::size_t>(ci)].type;
        break;
      }
    }
    for (auto it = t.dims.rbegin(); it != t.dims.rend(); ++it) {
      if (*it < 1) throw TypeError(t.pos, "array length must be at least 1");
      base = types_.array(base, *it);
    }
    return base;
  }

  MethodSig signature(FuncDecl& f) {
    MethodSig sig;
    sig.name = f.name;
    std::set<std::string> seen;
    for (Param& p : f.params) {
      if (!seen.insert(p.name).second) throw TypeError(p.pos, "duplicate parameter '" + p.name + "'");
      p.resolved = resolve(p.type);
      sig.params.emplace_back(p.name, p.resolved);
    }
    sig.ret = f.ret ? resolve(*f.ret) : TypeTable::kVoid;
    f.ret_type = sig.ret;
    return sig;
  }

  void resolve_signatures() {
    auto& ast = tm_.ast;
    for (std::size_t c = 0; c < ast.classes.size(); ++c) {
      ClsDecl& decl = ast.classes[c];
      ClassInfo& info = tm_.classes[static_cast<std::size_t>(class_of_decl_[c])];
      for (const FieldDecl& f : decl.fields) {
        if (info.field(f.name)) throw TypeError(f.pos, "duplicate field '" + f.name + "'");
        info.fields.push_back({f.name, resolve(f.type), 0, 0});
      }
      for (FuncDecl& m : decl.methods) {
        if (info.method_index(m.name) >= 0) throw TypeError(m.pos, "duplicate method '" + m.name + "'");
        info.methods.push_back(signature(m));
      }
    }
    for (FuncDecl& f : ast.functions) tm_.functions.push_back(signature(f));
    for (std::size_t i = 0; i < ast.actions.size(); ++i) {
      ActDecl& a = ast.actions[i];
      if (tm_.find_class(a.return_class) != tm_.acts[i].class_index) {
        throw TypeError(a.pos, "class name '" + a.return_class + "' collides with a declared class");
      }
      MethodSig ctor;
      ctor.name = a.name;
      std::set<std::string> seen;
      for (Param& p : a.params) {
        if (!seen.insert(p.name).second) throw TypeError(p.pos, "duplicate parameter '" + p.name + "'");
        p.resolved = resolve(p.type);
        ctor.params.emplace_back(p.name, p.resolved);
      }
      ctor.ret = tm_.classes[static_cast<std::size_t>(tm_.acts[i].class_index)].type;
      tm_.acts[i].constructor = std::move(ctor);
    }
  }

  // -- layout ---------------------------------------------------------------

  std::int64_t slots_of(TypeId id, SourcePos pos) {
    const TypeInfo& t = types_[id];
    if (t.kind == TypeInfo::Kind::Class) ensure_layout(t.class_index, pos);
    if (t.kind == TypeInfo::Kind::Array) slots_of(t.elem, pos);
    return tm_.slot_count(id);
  }

  void ensure_layout(int ci, SourcePos pos) {
    ClassInfo& c = tm_.classes[static_cast<std::size_t>(ci)];
    if (c.layout_done) return;
    if (c.origin == ClassInfo::Origin::SynthesizedFromAct) {
      throw TypeError(pos, "class '" + c.name + "' is used before its act is checked");
    }
    if (!in_layout_.insert(ci).second) throw TypeError(pos, "class '" + c.name + "' contains itself");
    SourcePos decl_pos = tm_.ast.classes[static_cast<std::size_t>(c.decl_index)].pos;
    std::int64_t slot = 0, byte = 0;
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
      TypeId ft = tm_.classes[static_cast<std::size_t>(ci)].fields[i].type;
      std::int64_t s = slots_of(ft, decl_pos);
      FieldInfo& f = tm_.classes[static_cast<std::size_t>(ci)].fields[i];
      f.slot_offset = slot;
      f.byte_offset = byte;
      slot += s;
      byte += tm_.byte_size(ft);
    }
    ClassInfo& done = tm_.classes[static_cast<std::size_t>(ci)];
    done.slots = slot;
    done.bytes = byte;
    done.layout_done = true;
    in_layout_.erase(ci);
  }

  // -- bodies ---------------------------------------------------------------

  struct Ctx {
    ActInfo* act = nullptr;
    int self_class = -1;
    TypeId ret = TypeTable::kVoid;
    std::vector<std::vector<Var>> scopes;
    std::int64_t locals = 0;
    std::int64_t frame = 0;
  };

  const Var* lookup(const std::string& name) const {
    for (auto s = ctx_.scopes.rbegin(); s != ctx_.scopes.rend(); ++s) {
      for (auto v = s->rbegin(); v != s->rend(); ++v) {
        if (v->name == name) return &*v;
      }
    }
    return nullptr;
  }

  void declare_local(const std::string& name, TypeId type, std::int64_t offset, SourcePos pos) {
    if (const Var* v = lookup(name); v && v->root == Resolution::Kind::Frame) {
      throw TypeError(pos, "'" + name + "' shadows a frame variable");
    }
    ctx_.scopes.back().push_back({name, type, Resolution::Kind::Local, offset});
  }

  std::int64_t alloc_local(TypeId type, SourcePos pos) {
    std::int64_t off = ctx_.locals;
    ctx_.locals += slots_of(type, pos);
    return off;
  }

  void check_function(FuncDecl& f, MethodSig& sig, int self_class) {
    ctx_ = Ctx{};
    ctx_.self_class = self_class;
    ctx_.ret = sig.ret;
    ctx_.scopes.emplace_back();
    for (Param& p : f.params) {
      p.offset = alloc_local(p.resolved, p.pos);
      declare_local(p.name, p.resolved, p.offset, p.pos);
    }
    slots_of(sig.ret, f.pos);
    check_body(f.body);
    f.locals_size = ctx_.locals;
  }

  void check_act(int act_index) {
    ActDecl& a = tm_.ast.actions[static_cast<std::size_t>(act_index)];
    ActInfo& info = tm_.acts[static_cast<std::size_t>(act_index)];
    ctx_ = Ctx{};
    ctx_.act = &info;
    ctx_.scopes.emplace_back();
    ClassInfo& cls = tm_.classes[static_cast<std::size_t>(info.class_index)];
    cls.fields.clear();
    cls.fields.push_back({"resume_idx", TypeTable::kInt, 0, 0});
    ctx_.frame = 1;
    for (Param& p : a.params) {
      p.offset = ctx_.frame;
      ctx_.frame += slots_of(p.resolved, p.pos);
      add_frame_field(info, p.name, p.resolved, p.offset);
      ctx_.scopes.back().push_back({p.name, p.resolved, Resolution::Kind::Frame, p.offset});
    }
    check_body(a.body);
    if (info.points.empty()) {
      throw TypeError(a.pos, "act '" + a.name + "' contains no action statement");
    }
    a.locals_size = ctx_.locals;
    check_suspension_lifetimes(a);
    finalize_class(info);
  }

  void add_frame_field(ActInfo& info, const std::string& name, TypeId type, std::int64_t offset) {
    ClassInfo& cls = tm_.classes[static_cast<std::size_t>(info.class_index)];
    cls.fields.push_back({name, type, offset, 0});
  }

  void finalize_class(ActInfo& info) {
    ClassInfo& cls = tm_.classes[static_cast<std::size_t>(info.class_index)];
    std::int64_t byte = 0;
    for (FieldInfo& f : cls.fields) {
      f.byte_offset = byte;
      byte += tm_.byte_size(f.type);
    }
    cls.slots = ctx_.frame;
    cls.bytes = byte;
    cls.methods.clear();
    for (const ActionInfo& act : info.actions) {
      MethodSig can, apply;
      can.name = "can_" + act.name;
      can.kind = MethodSig::Kind::CanPredicate;
      can.ret = TypeTable::kBool;
      apply.name = act.name;
      apply.kind = MethodSig::Kind::ActionApply;
      apply.mutates_self = true;
      for (std::size_t i = 0; i < act.param_types.size(); ++i) {
        can.params.emplace_back(act.param_names[i], act.param_types[i]);
      }
      apply.params = can.params;
      cls.methods.push_back(std::move(can));
      cls.methods.push_back(std::move(apply));
    }
    MethodSig done;
    done.name = "is_done";
    done.kind = MethodSig::Kind::IsDone;
    done.ret = TypeTable::kBool;
    cls.methods.push_back(std::move(done));
    cls.layout_done = true;
  }

  void check_body(std::vector<Stmt>& body) {
    ctx_.scopes.emplace_back();
    for (Stmt& s : body) check_stmt(s);
    ctx_.scopes.pop_back();
  }

  bool assignable(TypeId dst, TypeId src) const {
    if (dst == src) return true;
    bool dst_int = types_.is_integral(dst);
    if (dst_int && types_.is_integral(src)) return true;
    return dst_int && src == TypeTable::kBool;
  }

  void require_assignable(TypeId dst, TypeId src, SourcePos pos) {
    if (!assignable(dst, src)) {
      throw TypeError(pos, "cannot convert " + tm_.type_name(src) + " to " + tm_.type_name(dst));
    }
  }

  static bool is_place(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::SelfRef:
        return true;
      case ExprKind::Field:
      case ExprKind::Index:
        return is_place(e.operands[0]);
      default:
        return false;
    }
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let:
      case StmtKind::Frame: {
        bool frame = s.kind == StmtKind::Frame;
        if (frame && !ctx_.act) throw TypeError(s.pos, "'frm' is only allowed inside an act");
        TypeId t = kNoType;
        if (s.declared) t = resolve(*s.declared);
        if (s.value) {
          TypeId vt = check_expr(*s.value);
          if (vt == TypeTable::kVoid) throw TypeError(s.value->pos, "expression has no value");
          if (t == kNoType) {
            t = vt;
          } else {
            require_assignable(t, vt, s.value->pos);
          }
        }
        s.var_type = t;
        if (frame) {
          ClassInfo& cls = tm_.classes[static_cast<std::size_t>(ctx_.act->class_index)];
          if (cls.field(s.name)) throw TypeError(s.pos, "duplicate frame variable '" + s.name + "'");
          if (const Var* v = lookup(s.name); v) throw TypeError(s.pos, "'" + s.name + "' is already declared");
          s.var_offset = ctx_.frame;
          ctx_.frame += slots_of(t, s.pos);
          add_frame_field(*ctx_.act, s.name, t, s.var_offset);
          ctx_.scopes.back().push_back({s.name, t, Resolution::Kind::Frame, s.var_offset});
        } else {
          for (const Var& v : ctx_.scopes.back()) {
            if (v.name == s.name) throw TypeError(s.pos, "'" + s.name + "' is already declared");
          }
          s.var_offset = alloc_local(t, s.pos);
          declare_local(s.name, t, s.var_offset, s.pos);
        }
        return;
      }
      case StmtKind::Assign: {
        TypeId lt = check_expr(*s.target);
        if (!is_place(*s.target)) throw TypeError(s.target->pos, "left side of assignment is not assignable");
        const Expr& t = *s.target;
        if (t.kind == ExprKind::Field && t.name == "resume_idx" &&
            tm_.act_of_class(types_[t.operands[0].type].class_index) >= 0) {
          throw TypeError(t.pos, "resume_idx is read-only");
        }
        require_assignable(lt, check_expr(*s.value), s.value->pos);
        return;
      }
      case StmtKind::If:
      case StmtKind::While:
        if (check_expr(*s.target) != TypeTable::kBool) throw TypeError(s.target->pos, "condition must be Bool");
        check_body(s.body);
        if (s.kind == StmtKind::If) check_body(s.else_body);
        return;
      case StmtKind::Return:
        if (ctx_.act) {
          if (s.value) throw TypeError(s.pos, "an act cannot return a value");
          return;
        }
        if (ctx_.ret == TypeTable::kVoid) {
          if (s.value) throw TypeError(s.pos, "function has no return type");
          return;
        }
        if (!s.value) throw TypeError(s.pos, "missing return value");
        require_assignable(ctx_.ret, check_expr(*s.value), s.value->pos);
        return;
      case StmtKind::ExprStmt:
        check_expr(*s.target);
        return;
      case StmtKind::Action:
        check_action(s);
        return;
    }
  }

  void check_action(Stmt& s) {
    if (!ctx_.act) throw TypeError(s.pos, "action statement outside an act");
    ActInfo& act = *ctx_.act;
    s.point_index = static_cast<int>(act.points.size());
    act.points.push_back(&s);
    std::vector<TypeId> ptypes;
    std::vector<std::string> pnames;
    std::set<std::string> seen;
    for (Param& p : s.params) {
      if (!seen.insert(p.name).second) throw TypeError(p.pos, "duplicate parameter '" + p.name + "'");
      p.resolved = resolve(p.type);
      auto k = types_[p.resolved].kind;
      if (k != TypeInfo::Kind::Bool && k != TypeInfo::Kind::Bounded) {
        throw TypeError(p.pos, "action parameter '" + p.name + "' must be Bool or a bounded Int, not " +
                                   tm_.type_name(p.resolved));
      }
      ptypes.push_back(p.resolved);
      pnames.push_back(p.name);
    }
    int ai = act.action_index(s.name);
    if (ai < 0) {
      act.actions.push_back({s.name, pnames, ptypes, {}});
      ai = static_cast<int>(act.actions.size() - 1);
    } else if (act.actions[static_cast<std::size_t>(ai)].param_types != ptypes) {
      throw TypeError(s.pos, "action '" + s.name + "' redeclared with a different signature");
    }
    act.actions[static_cast<std::size_t>(ai)].points.push_back(s.point_index);
    for (Param& p : s.params) {
      p.offset = alloc_local(p.resolved, p.pos);
      declare_local(p.name, p.resolved, p.offset, p.pos);
    }
    for (Expr& pre : s.preconditions) {
      if (check_expr(pre) != TypeTable::kBool) throw TypeError(pre.pos, "precondition must be Bool");
      preconditions_.push_back(&pre);
    }
  }

  // -- expressions ----------------------------------------------------------

  TypeId check_args(Expr& call, std::size_t first, const std::vector<std::pair<std::string, TypeId>>& params,
                    TypeId ret) {
    std::size_t n = call.operands.size() - first;
    if (n != params.size()) {
      throw TypeError(call.pos, "'" + call.name + "' expects " + std::to_string(params.size()) +
                                    " argument(s), got " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      Expr& arg = call.operands[first + i];
      require_assignable(params[i].second, check_expr(arg), arg.pos);
    }
    return ret;
  }

  TypeId check_expr(Expr& e) {
    e.type = infer(e);
    return e.type;
  }

  TypeId infer(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return TypeTable::kInt;
      case ExprKind::FloatLit: return TypeTable::kFloat;
      case ExprKind::BoolLit: return TypeTable::kBool;
      case ExprKind::Name: {
        const Var* v = lookup(e.name);
        if (!v) throw TypeError(e.pos, "undefined name '" + e.name + "'");
        e.res.kind = v->root;
        e.res.offset = v->offset;
        return v->type;
      }
      case ExprKind::SelfRef:
        if (ctx_.self_class < 0) throw TypeError(e.pos, "'self' outside a method");
        return tm_.classes[static_cast<std::size_t>(ctx_.self_class)].type;
      case ExprKind::Field: {
        TypeId bt = check_expr(e.operands[0]);
        if (types_[bt].kind != TypeInfo::Kind::Class) {
          throw TypeError(e.pos, "value of type " + tm_.type_name(bt) + " has no fields");
        }
        int ci = types_[bt].class_index;
        if (!tm_.classes[static_cast<std::size_t>(ci)].layout_done) ensure_layout(ci, e.pos);
        const FieldInfo* f = tm_.classes[static_cast<std::size_t>(ci)].field(e.name);
        if (!f) throw TypeError(e.pos, "class " + tm_.type_name(bt) + " has no field '" + e.name + "'");
        e.res.offset = f->slot_offset;
        return f->type;
      }
      case ExprKind::Index: {
        TypeId bt = check_expr(e.operands[0]);
        if (types_[bt].kind != TypeInfo::Kind::Array) {
          throw TypeError(e.pos, "value of type " + tm_.type_name(bt) + " cannot be indexed");
        }
        if (!types_.is_integral(check_expr(e.operands[1]))) throw TypeError(e.operands[1].pos, "index must be Int");
        slots_of(types_[bt].elem, e.pos);
        return types_[bt].elem;
      }
      case ExprKind::Call: return infer_call(e);
      case ExprKind::MethodCall: return infer_method_call(e);
      case ExprKind::Unary: {
        TypeId t = check_expr(e.operands[0]);
        if (e.unary == UnaryOp::Not) {
          if (t != TypeTable::kBool) throw TypeError(e.pos, "operand of '!' must be Bool");
          return TypeTable::kBool;
        }
        if (types_.is_integral(t)) return TypeTable::kInt;
        if (t == TypeTable::kFloat) return TypeTable::kFloat;
        throw TypeError(e.pos, "operand of unary '-' must be numeric");
      }
      case ExprKind::Binary: return infer_binary(e);
    }
    return kNoType;
  }

  TypeId infer_binary(Expr& e) {
    TypeId l = check_expr(e.operands[0]);
    TypeId r = check_expr(e.operands[1]);
    auto bad = [&]() -> TypeError {
      return TypeError(e.pos, std::string("invalid operands to '") + to_string(e.binary) + "': " + tm_.type_name(l) +
                                  " and " + tm_.type_name(r));
    };
    bool ints = types_.is_integral(l) && types_.is_integral(r);
    bool floats = l == TypeTable::kFloat && r == TypeTable::kFloat;
    switch (e.binary) {
      case BinaryOp::And:
      case BinaryOp::Or:
        if (l != TypeTable::kBool || r != TypeTable::kBool) throw bad();
        return TypeTable::kBool;
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
      case BinaryOp::Div:
        if (ints) return TypeTable::kInt;
        if (floats) return TypeTable::kFloat;
        throw bad();
      case BinaryOp::Mod:
        if (ints) return TypeTable::kInt;
        throw bad();
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
        if (ints || floats) return TypeTable::kBool;
        throw bad();
      case BinaryOp::Eq:
      case BinaryOp::Ne:
        if (ints || l == r) {
          if (l == TypeTable::kVoid) throw bad();
          return TypeTable::kBool;
        }
        throw bad();
    }
    throw bad();
  }

  TypeId infer_call(Expr& e) {
    if (int fi = tm_.find_function(e.name); fi >= 0) {
      e.res.kind = Resolution::Kind::Function;
      e.res.index = fi;
      const MethodSig& sig = tm_.functions[static_cast<std::size_t>(fi)];
      return check_args(e, 0, sig.params, sig.ret);
    }
    if (int ai = tm_.find_act(e.name); ai >= 0) {
      const ActInfo& act = tm_.acts[static_cast<std::size_t>(ai)];
      if (!tm_.classes[static_cast<std::size_t>(act.class_index)].layout_done) {
        throw TypeError(e.pos, "act '" + e.name + "' is used before it is checked");
      }
      e.res.kind = Resolution::Kind::ActCtor;
      e.res.index = ai;
      return check_args(e, 0, act.constructor.params, act.constructor.ret);
    }
    const auto& table = builtins();
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (e.name == table[i].name) {
        e.res.kind = Resolution::Kind::Builtin;
        e.res.index = static_cast<int>(i);
        std::vector<std::pair<std::string, TypeId>> ps;
        for (TypeId t : table[i].params) ps.emplace_back("", t);
        // Builtins take integral arguments strictly as Int, never Bool.
        TypeId ret = check_args(e, 0, ps, table[i].ret);
        for (std::size_t a = 0; a < e.operands.size(); ++a) {
          if (e.operands[a].type == TypeTable::kBool) {
            throw TypeError(e.operands[a].pos, std::string("'") + table[i].name + "' does not accept Bool");
          }
        }
        return ret;
      }
    }
    throw TypeError(e.pos, "undefined function '" + e.name + "'");
  }

  TypeId infer_method_call(Expr& e) {
    TypeId rt = check_expr(e.operands[0]);
    if (types_[rt].kind != TypeInfo::Kind::Class) {
      throw TypeError(e.pos, "value of type " + tm_.type_name(rt) + " has no methods");
    }
    int ci = types_[rt].class_index;
    const ClassInfo& cls = tm_.classes[static_cast<std::size_t>(ci)];
    int act = tm_.act_of_class(ci);
    if (act < 0) {
      int mi = cls.method_index(e.name);
      if (mi < 0) throw TypeError(e.pos, "class " + cls.name + " has no method '" + e.name + "'");
      e.res.kind = Resolution::Kind::Method;
      e.res.index = ci;
      e.res.sub = mi;
      const MethodSig& sig = cls.methods[static_cast<std::size_t>(mi)];
      return check_args(e, 1, sig.params, sig.ret);
    }
    if (!cls.layout_done) throw TypeError(e.pos, "class " + cls.name + " is used before its act is checked");
    const ActInfo& info = tm_.acts[static_cast<std::size_t>(act)];
    e.res.index = act;
    if (e.name == "is_done") {
      e.res.kind = Resolution::Kind::ActIsDone;
      return check_args(e, 1, {}, TypeTable::kBool);
    }
    std::string_view name = e.name;
    bool can = name.starts_with("can_");
    int ai = info.action_index(can ? name.substr(4) : name);
    if (ai < 0) {
      throw TypeError(e.pos, "class " + cls.name + " has no action method '" + e.name + "'");
    }
    e.res.kind = can ? Resolution::Kind::ActCan : Resolution::Kind::ActApply;
    e.res.sub = ai;
    const ActionInfo& a = info.actions[static_cast<std::size_t>(ai)];
    std::vector<std::pair<std::string, TypeId>> ps;
    for (std::size_t i = 0; i < a.param_types.size(); ++i) ps.emplace_back(a.param_names[i], a.param_types[i]);
    return check_args(e, 1, ps, can ? TypeTable::kBool : TypeTable::kVoid);
  }

  // -- suspension lifetimes -------------------------------------------------

  // Forward may-be-stale analysis over locals: every suspension invalidates
  // all non-frame locals; action parameters and re-declarations refresh.
  struct Flow {
    std::vector<bool> stale;
    bool live = true;
  };

  void check_suspension_lifetimes(const ActDecl& a) {
    Flow in;
    in.stale.assign(static_cast<std::size_t>(a.locals_size), false);
    flow_body(a.body, in);
  }

  static void merge(Flow& into, const Flow& other) {
    if (!other.live) return;
    if (!into.live) {
      into = other;
      return;
    }
    for (std::size_t i = 0; i < into.stale.size(); ++i) into.stale[i] = into.stale[i] || other.stale[i];
  }

  void check_uses(const Expr& e, const Flow& f) const {
    visit_const_exprs(e, [&](const Expr& x) {
      if (x.kind == ExprKind::Name && x.res.kind == Resolution::Kind::Local &&
          f.stale[static_cast<std::size_t>(x.res.offset)]) {
        throw TypeError(x.pos, "local '" + x.name +
                                   "' does not survive a suspension point; declare it with 'frm' instead");
      }
    });
  }

  void flow_body(const std::vector<Stmt>& body, Flow& f) const {
    for (const Stmt& s : body) {
      if (!f.live) return;
      flow_stmt(s, f);
    }
  }

  void flow_stmt(const Stmt& s, Flow& f) const {
    switch (s.kind) {
      case StmtKind::Let:
        if (s.value) check_uses(*s.value, f);
        f.stale[static_cast<std::size_t>(s.var_offset)] = false;
        return;
      case StmtKind::Frame:
        if (s.value) check_uses(*s.value, f);
        return;
      case StmtKind::Assign:
        check_uses(*s.value, f);
        if (s.target->kind == ExprKind::Name && s.target->res.kind == Resolution::Kind::Local) {
          f.stale[static_cast<std::size_t>(s.target->res.offset)] = false;
        } else {
          check_uses(*s.target, f);
        }
        return;
      case StmtKind::ExprStmt:
        check_uses(*s.target, f);
        return;
      case StmtKind::Return:
        if (s.value) check_uses(*s.value, f);
        f.live = false;
        return;
      case StmtKind::Action:
        std::fill(f.stale.begin(), f.stale.end(), true);
        for (const Param& p : s.params) f.stale[static_cast<std::size_t>(p.offset)] = false;
        for (const Expr& pre : s.preconditions) check_uses(pre, f);
        return;
      case StmtKind::If: {
        check_uses(*s.target, f);
        Flow a = f, b = f;
        flow_body(s.body, a);
        flow_body(s.else_body, b);
        f = a;
        f.live = false;
        merge(f, a);
        merge(f, b);
        return;
      }
      case StmtKind::While: {
        Flow head = f;
        for (;;) {
          check_uses(*s.target, head);
          Flow body = head;
          flow_body(s.body, body);
          Flow next = head;
          merge(next, body);
          if (next.stale == head.stale) break;
          head = next;
        }
        f = head;
        return;
      }
    }
  }

  // -- purity ---------------------------------------------------------------

  static const Expr* place_root(const Expr& e) {
    const Expr* cur = &e;
    while (cur->kind == ExprKind::Field || cur->kind == ExprKind::Index) cur = &cur->operands[0];
    return (cur->kind == ExprKind::Name || cur->kind == ExprKind::SelfRef) ? cur : nullptr;
  }

  bool call_mutates(const Expr& e) const {
    if (e.res.kind == Resolution::Kind::ActApply) return true;
    if (e.res.kind != Resolution::Kind::Method) return false;
    return tm_.classes[static_cast<std::size_t>(e.res.index)].methods[static_cast<std::size_t>(e.res.sub)].mutates_self;
  }

  bool writes_self(std::vector<Stmt>& body) const {
    bool found = false;
    auto rooted_at_self = [](const Expr& e) {
      const Expr* root = place_root(e);
      return root && root->kind == ExprKind::SelfRef;
    };
    visit_const_stmts(body, [&](const Stmt& s) {
      if (s.kind == StmtKind::Assign && rooted_at_self(*s.target)) found = true;
    });
    visit_stmt_exprs(body, [&](Expr& e) {
      if (e.kind == ExprKind::MethodCall && call_mutates(e) && rooted_at_self(e.operands[0])) found = true;
    });
    return found;
  }

  void compute_purity() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t c = 0; c < tm_.ast.classes.size(); ++c) {
        ClassInfo& info = tm_.classes[static_cast<std::size_t>(class_of_decl_[c])];
        for (std::size_t m = 0; m < tm_.ast.classes[c].methods.size(); ++m) {
          if (info.methods[m].mutates_self) continue;
          if (writes_self(tm_.ast.classes[c].methods[m].body)) {
            info.methods[m].mutates_self = true;
            changed = true;
          }
        }
      }
    }
    auto annotate = [&](Expr& e) {
      if (e.kind == ExprKind::MethodCall) e.res.mutates = call_mutates(e);
    };
    for (auto& f : tm_.ast.functions) visit_stmt_exprs(f.body, annotate);
    for (auto& a : tm_.ast.actions) visit_stmt_exprs(a.body, annotate);
    for (auto& c : tm_.ast.classes) {
      for (auto& m : c.methods) visit_stmt_exprs(m.body, annotate);
    }
  }

  void check_pure(const Expr& pre) const {
    visit_const_exprs(pre, [&](const Expr& e) {
      if (e.kind == ExprKind::MethodCall && e.res.mutates) {
        throw TypeError(e.pos, "precondition calls '" + e.name + "', which modifies its receiver");
      }
    });
  }

  TypedModule& tm_;
  TypeTable& types_;
  Ctx ctx_;
  std::vector<int> class_of_decl_;
  std::set<int> in_layout_;
  std::vector<const Expr*> preconditions_;
};

}  // namespace

std::unique_ptr<TypedModule> typecheck(ModuleAst module) {
  auto tm = std::make_unique<TypedModule>();
  tm->ast = std::move(module);
  Checker(*tm).run();
  return tm;
}

}  // namespace rb1
