#include "interpreter.hpp"

#include <cmath>
#include <limits>

namespace rb1::detail {

namespace {

constexpr std::size_t kChunkSlots = 1 << 16;

std::string bounded_name(const TypeInfo& t) {
  return "Int<" + std::to_string(t.min) + ", " + std::to_string(t.max) + ">";
}

}  // namespace

// ---------------------------------------------------------------------------
// Arena

Arena& Arena::local() {
  thread_local Arena arena;
  return arena;
}

void Arena::release(Mark m) {
  if (chunks_.empty()) return;
  for (std::size_t c = m.chunk + 1; c <= current_ && c < chunks_.size(); ++c) chunks_[c].used = 0;
  current_ = m.chunk;
  chunks_[current_].used = m.used;
}

Slot* Arena::alloc(std::int64_t n) {
  auto need = static_cast<std::size_t>(n);
  if (need == 0) need = 1;
  if (chunks_.empty()) chunks_.push_back({std::vector<Slot>(std::max(kChunkSlots, need)), 0});
  while (chunks_[current_].data.size() - chunks_[current_].used < need) {
    ++current_;
    if (current_ == chunks_.size()) {
      chunks_.push_back({std::vector<Slot>(std::max(kChunkSlots, need)), 0});
    } else if (chunks_[current_].data.size() < need) {
      chunks_[current_].data.assign(need, 0);
    }
    chunks_[current_].used = 0;
  }
  Chunk& c = chunks_[current_];
  Slot* p = c.data.data() + c.used;
  c.used += need;
  return p;
}

// ---------------------------------------------------------------------------
// Bookkeeping

void Interpreter::tick(SourcePos pos) {
  if (++steps_ > p_.limits.max_steps_per_resume) {
    throw RuntimeError("step-limit", pos,
                       "step limit of " + std::to_string(p_.limits.max_steps_per_resume) + " exceeded");
  }
}

void Interpreter::enter(SourcePos pos) {
  if (++depth_ > p_.limits.max_call_depth) {
    throw RuntimeError("call-depth", pos, "call depth limit of " + std::to_string(p_.limits.max_call_depth) + " exceeded");
  }
}

void Interpreter::store_scalar(TypeId dst_type, Slot* dst, Slot v, SourcePos pos) {
  const TypeInfo& t = tm_.types[dst_type];
  if (t.kind == TypeInfo::Kind::Bounded && (v < t.min || v > t.max)) {
    throw RuntimeError("range", pos, "value " + std::to_string(v) + " out of range for " + bounded_name(t));
  }
  *dst = v;
}

void Interpreter::eval_store(TypeId dst_type, Slot* dst, const Expr& e, Activation& a) {
  if (tm_.types.is_scalar(dst_type)) {
    store_scalar(dst_type, dst, eval_scalar(e, a), e.pos);
    return;
  }
  eval_into(e, a, dst);
}

bool Interpreter::values_equal(TypeId type, const Slot* x, const Slot* y) const {
  const TypeInfo& t = tm_.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Float: return to_double(*x) == to_double(*y);
    case TypeInfo::Kind::Array: {
      std::int64_t n = slots(t.elem);
      for (std::int64_t i = 0; i < t.len; ++i) {
        if (!values_equal(t.elem, x + i * n, y + i * n)) return false;
      }
      return true;
    }
    case TypeInfo::Kind::Class: {
      for (const FieldInfo& f : tm_.classes[static_cast<std::size_t>(t.class_index)].fields) {
        if (!values_equal(f.type, x + f.slot_offset, y + f.slot_offset)) return false;
      }
      return true;
    }
    default: return *x == *y;
  }
}

// ---------------------------------------------------------------------------
// Statements

Interpreter::Flow Interpreter::exec_simple(const Stmt& s, Activation& a) {
  tick(s.pos);
  switch (s.kind) {
    case StmtKind::Let:
    case StmtKind::Frame: {
      Slot* dst = (s.kind == StmtKind::Let ? a.locals : a.frame) + s.var_offset;
      if (s.value) {
        eval_store(s.var_type, dst, *s.value, a);
      } else {
        const auto& d = p_.default_value(s.var_type);
        std::copy(d.begin(), d.end(), dst);
      }
      return Flow::Normal;
    }
    case StmtKind::Assign: {
      TypeId t = s.target->type;
      if (tm_.types.is_scalar(t)) {
        Slot v = eval_scalar(*s.value, a);
        ArenaScope scope;
        store_scalar(t, eval_ref(*s.target, a, scope), v, s.value->pos);
      } else {
        ArenaScope scope;
        std::int64_t n = slots(t);
        Slot* tmp = scope.alloc(n);
        eval_into(*s.value, a, tmp);
        std::copy(tmp, tmp + n, eval_ref(*s.target, a, scope));
      }
      return Flow::Normal;
    }
    case StmtKind::ExprStmt: {
      const Expr& e = *s.target;
      if (tm_.types.is_scalar(e.type) || e.type == TypeTable::kVoid) {
        eval_scalar(e, a);
      } else {
        ArenaScope scope;
        eval_into(e, a, scope.alloc(slots(e.type)));
      }
      return Flow::Normal;
    }
    default:
      return exec_stmt(s, a);
  }
}

Interpreter::Flow Interpreter::exec_body(const std::vector<Stmt>& body, Activation& a) {
  for (const Stmt& s : body) {
    if (exec_stmt(s, a) == Flow::Return) return Flow::Return;
  }
  return Flow::Normal;
}

Interpreter::Flow Interpreter::exec_stmt(const Stmt& s, Activation& a) {
  switch (s.kind) {
    case StmtKind::If:
      tick(s.pos);
      return exec_body(eval_bool(*s.target, a) ? s.body : s.else_body, a);
    case StmtKind::While:
      for (;;) {
        tick(s.pos);
        if (!eval_bool(*s.target, a)) return Flow::Normal;
        if (exec_body(s.body, a) == Flow::Return) return Flow::Return;
      }
    case StmtKind::Return:
      tick(s.pos);
      if (s.value) {
        if (tm_.types.is_scalar(a.ret_type)) {
          store_scalar(a.ret_type, &a.ret_val, eval_scalar(*s.value, a), s.value->pos);
        } else {
          eval_into(*s.value, a, a.ret_dst);
        }
      }
      return Flow::Return;
    case StmtKind::Action:
      throw RuntimeError("internal", s.pos, "action statement outside an act");
    default:
      return exec_simple(s, a);
  }
}

// ---------------------------------------------------------------------------
// Expressions

Slot* Interpreter::eval_ref(const Expr& e, Activation& a, ArenaScope& scope) {
  switch (e.kind) {
    case ExprKind::Name:
      return (e.res.kind == Resolution::Kind::Local ? a.locals : a.frame) + e.res.offset;
    case ExprKind::SelfRef:
      return a.self;
    case ExprKind::Field:
      return eval_ref(e.operands[0], a, scope) + e.res.offset;
    case ExprKind::Index: {
      Slot* base = eval_ref(e.operands[0], a, scope);
      Slot i = eval_scalar(e.operands[1], a);
      const TypeInfo& t = tm_.types[e.operands[0].type];
      if (i < 0 || i >= t.len) {
        throw RuntimeError("index", e.operands[1].pos,
                           "index " + std::to_string(i) + " out of bounds for length " + std::to_string(t.len));
      }
      return base + i * slots(t.elem);
    }
    default: {
      Slot* tmp = scope.alloc(slots(e.type));
      if (tm_.types.is_scalar(e.type)) {
        *tmp = eval_scalar(e, a);
      } else {
        eval_into(e, a, tmp);
      }
      return tmp;
    }
  }
}

void Interpreter::eval_into(const Expr& e, Activation& a, Slot* dst) {
  if (e.kind == ExprKind::Call || e.kind == ExprKind::MethodCall) {
    eval_call(e, a, dst);
    return;
  }
  ArenaScope scope;
  const Slot* src = eval_ref(e, a, scope);
  std::int64_t n = slots(e.type);
  if (src != dst) std::memmove(dst, src, static_cast<std::size_t>(n) * sizeof(Slot));
}

Slot Interpreter::eval_scalar(const Expr& e, Activation& a) {
  switch (e.kind) {
    case ExprKind::IntLit: return e.int_value;
    case ExprKind::FloatLit: return from_double(e.float_value);
    case ExprKind::BoolLit: return e.bool_value ? 1 : 0;
    case ExprKind::Name: return (e.res.kind == Resolution::Kind::Local ? a.locals : a.frame)[e.res.offset];
    case ExprKind::SelfRef:
    case ExprKind::Field:
    case ExprKind::Index: {
      ArenaScope scope;
      return *eval_ref(e, a, scope);
    }
    case ExprKind::Call:
    case ExprKind::MethodCall: return eval_call(e, a, nullptr);
    case ExprKind::Unary: {
      Slot v = eval_scalar(e.operands[0], a);
      if (e.unary == UnaryOp::Not) return v ? 0 : 1;
      if (e.type == TypeTable::kFloat) return from_double(-to_double(v));
      if (v == std::numeric_limits<Slot>::min()) throw RuntimeError("overflow", e.pos, "integer overflow in negation");
      return -v;
    }
    case ExprKind::Binary: return eval_binary(e, a);
  }
  return 0;
}

Slot Interpreter::eval_binary(const Expr& e, Activation& a) {
  const Expr& lhs = e.operands[0];
  const Expr& rhs = e.operands[1];
  if (e.binary == BinaryOp::And) return eval_bool(lhs, a) && eval_bool(rhs, a) ? 1 : 0;
  if (e.binary == BinaryOp::Or) return eval_bool(lhs, a) || eval_bool(rhs, a) ? 1 : 0;

  if ((e.binary == BinaryOp::Eq || e.binary == BinaryOp::Ne) && !tm_.types.is_scalar(lhs.type)) {
    ArenaScope scope;
    const Slot* x = eval_ref(lhs, a, scope);
    const Slot* y = eval_ref(rhs, a, scope);
    bool eq = values_equal(lhs.type, x, y);
    return (e.binary == BinaryOp::Eq) == eq ? 1 : 0;
  }

  Slot l = eval_scalar(lhs, a);
  Slot r = eval_scalar(rhs, a);
  if (lhs.type == TypeTable::kFloat) {
    double x = to_double(l), y = to_double(r), z = 0.0;
    switch (e.binary) {
      case BinaryOp::Eq: return x == y;
      case BinaryOp::Ne: return x != y;
      case BinaryOp::Lt: return x < y;
      case BinaryOp::Le: return x <= y;
      case BinaryOp::Gt: return x > y;
      case BinaryOp::Ge: return x >= y;
      case BinaryOp::Add: z = x + y; break;
      case BinaryOp::Sub: z = x - y; break;
      case BinaryOp::Mul: z = x * y; break;
      case BinaryOp::Div:
        if (y == 0.0) throw RuntimeError("division-by-zero", e.pos, "division by zero");
        z = x / y;
        break;
      default: break;
    }
    if (!std::isfinite(z)) throw RuntimeError("overflow", e.pos, "floating-point result is not finite");
    return from_double(z);
  }
  Slot z = 0;
  switch (e.binary) {
    case BinaryOp::Eq: return l == r;
    case BinaryOp::Ne: return l != r;
    case BinaryOp::Lt: return l < r;
    case BinaryOp::Le: return l <= r;
    case BinaryOp::Gt: return l > r;
    case BinaryOp::Ge: return l >= r;
    case BinaryOp::Add:
      if (__builtin_add_overflow(l, r, &z)) throw RuntimeError("overflow", e.pos, "integer overflow in '+'");
      return z;
    case BinaryOp::Sub:
      if (__builtin_sub_overflow(l, r, &z)) throw RuntimeError("overflow", e.pos, "integer overflow in '-'");
      return z;
    case BinaryOp::Mul:
      if (__builtin_mul_overflow(l, r, &z)) throw RuntimeError("overflow", e.pos, "integer overflow in '*'");
      return z;
    case BinaryOp::Div:
    case BinaryOp::Mod:
      if (r == 0) throw RuntimeError("division-by-zero", e.pos, "division by zero");
      if (l == std::numeric_limits<Slot>::min() && r == -1) {
        throw RuntimeError("overflow", e.pos, "integer overflow in division");
      }
      return e.binary == BinaryOp::Div ? l / r : l % r;
    default: return 0;
  }
}

Slot Interpreter::eval_builtin(const Expr& e, Activation& a) {
  const std::string_view name = builtins()[static_cast<std::size_t>(e.res.index)].name;
  Slot x = eval_scalar(e.operands[0], a);
  if (name == "float") return from_double(static_cast<double>(x));
  if (name == "int") {
    double d = std::trunc(to_double(x));
    if (!(d >= -9223372036854775808.0 && d < 9223372036854775808.0)) {
      throw RuntimeError("overflow", e.pos, "float value does not fit in Int");
    }
    return static_cast<Slot>(d);
  }
  if (name == "abs") {
    if (x == std::numeric_limits<Slot>::min()) throw RuntimeError("overflow", e.pos, "integer overflow in abs");
    return x < 0 ? -x : x;
  }
  Slot y = eval_scalar(e.operands[1], a);
  return name == "min" ? std::min(x, y) : std::max(x, y);
}

Slot Interpreter::invoke(const FuncDecl& f, Slot* self, Slot* locals, Slot* dst, SourcePos pos) {
  enter(pos);
  Activation callee;
  callee.locals = locals;
  callee.self = self;
  callee.ret_dst = dst;
  callee.ret_type = f.ret_type;
  if (exec_body(f.body, callee) == Flow::Normal && f.ret_type != TypeTable::kVoid) {
    throw RuntimeError("missing-return", f.pos, "function '" + f.name + "' ended without returning a value");
  }
  leave();
  return callee.ret_val;
}

void Interpreter::eval_action_args(const Expr& e, Activation& a, std::vector<Slot>& out, bool& in_range) {
  const ActionInfo& info = tm_.acts[static_cast<std::size_t>(e.res.index)].actions[static_cast<std::size_t>(e.res.sub)];
  out.clear();
  in_range = true;
  for (std::size_t i = 0; i < info.param_types.size(); ++i) {
    Slot v = eval_scalar(e.operands[i + 1], a);
    const TypeInfo& t = tm_.types[info.param_types[i]];
    if (t.kind == TypeInfo::Kind::Bounded && (v < t.min || v > t.max)) in_range = false;
    out.push_back(v);
  }
}

Slot Interpreter::eval_call(const Expr& e, Activation& a, Slot* dst) {
  switch (e.res.kind) {
    case Resolution::Kind::Builtin:
      return eval_builtin(e, a);
    case Resolution::Kind::Function: {
      const FuncDecl& f = tm_.ast.functions[static_cast<std::size_t>(e.res.index)];
      ArenaScope scope;
      Slot* locals = scope.alloc(f.locals_size);
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        eval_store(f.params[i].resolved, locals + f.params[i].offset, e.operands[i], a);
      }
      return invoke(f, nullptr, locals, dst, e.pos);
    }
    case Resolution::Kind::Method: {
      const ClassInfo& cls = tm_.classes[static_cast<std::size_t>(e.res.index)];
      const FuncDecl& f =
          tm_.ast.classes[static_cast<std::size_t>(cls.decl_index)].methods[static_cast<std::size_t>(e.res.sub)];
      ArenaScope scope;
      Slot* self = eval_ref(e.operands[0], a, scope);
      Slot* locals = scope.alloc(f.locals_size);
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        eval_store(f.params[i].resolved, locals + f.params[i].offset, e.operands[i + 1], a);
      }
      return invoke(f, self, locals, dst, e.pos);
    }
    case Resolution::Kind::ActCtor: {
      const ActDecl& act = tm_.ast.actions[static_cast<std::size_t>(e.res.index)];
      const ActInfo& info = tm_.acts[static_cast<std::size_t>(e.res.index)];
      TypeId type = tm_.classes[static_cast<std::size_t>(info.class_index)].type;
      ArenaScope scope;
      Slot* frame = scope.alloc(slots(type));
      const auto& d = p_.default_value(type);
      std::copy(d.begin(), d.end(), frame);
      for (std::size_t i = 0; i < act.params.size(); ++i) {
        eval_store(act.params[i].resolved, frame + act.params[i].offset, e.operands[i], a);
      }
      enter(e.pos);
      construct(e.res.index, frame);
      leave();
      std::copy(frame, frame + slots(type), dst);
      return 0;
    }
    case Resolution::Kind::ActIsDone: {
      ArenaScope scope;
      return eval_ref(e.operands[0], a, scope)[0] == -1 ? 1 : 0;
    }
    case Resolution::Kind::ActCan:
    case Resolution::Kind::ActApply: {
      ArenaScope scope;
      Slot* frame = eval_ref(e.operands[0], a, scope);
      std::vector<Slot> args;
      bool in_range = true;
      eval_action_args(e, a, args, in_range);
      enter(e.pos);
      bool ok = false;
      if (e.res.kind == Resolution::Kind::ActCan) {
        ok = in_range && guard(e.res.index, frame, e.res.sub, args.data());
      } else {
        ok = in_range && resume(e.res.index, frame, e.res.sub, args.data());
        if (!ok) {
          throw RuntimeError("precondition", e.pos,
                             "precondition of action '" + e.name + "' not satisfied at suspension index " +
                                 std::to_string(frame[0]));
        }
      }
      leave();
      return ok ? 1 : 0;
    }
    default:
      throw RuntimeError("internal", e.pos, "unresolved call '" + e.name + "'");
  }
}

// ---------------------------------------------------------------------------
// Machines

void Interpreter::bind_action_args(const Stmt& point, Activation& a, const Slot* args) {
  for (std::size_t i = 0; i < point.params.size(); ++i) a.locals[point.params[i].offset] = args[i];
}

bool Interpreter::eval_preconditions(const Stmt& point, Activation& a) {
  for (const Expr& pre : point.preconditions) {
    if (!eval_bool(pre, a)) return false;
  }
  return true;
}

void Interpreter::run_machine(int act, Slot* frame, Slot* locals, BlockId start) {
  const ActionMachine& m = p_.machine(act);
  Activation a;
  a.locals = locals;
  a.frame = frame;
  BlockId b = start;
  for (;;) {
    const Block& blk = m.blocks[static_cast<std::size_t>(b)];
    for (const Stmt* s : blk.stmts) exec_simple(*s, a);
    const Terminator& t = blk.term;
    tick(t.pos);
    switch (t.kind) {
      case Terminator::Kind::Jump:
      case Terminator::Kind::Guard:
        b = t.target;
        break;
      case Terminator::Kind::Branch:
        b = eval_bool(*t.cond, a) ? t.target : t.else_target;
        break;
      case Terminator::Kind::Suspend:
        frame[0] = t.point;
        return;
      case Terminator::Kind::Finish:
        frame[0] = -1;
        return;
    }
  }
}

void Interpreter::construct(int act, Slot* frame) {
  const ActionMachine& m = p_.machine(act);
  ArenaScope scope;
  run_machine(act, frame, scope.alloc(m.locals_slots), m.prologue);
}

bool Interpreter::guard(int act, const Slot* frame, int action, const Slot* args) {
  const ActionMachine& m = p_.machine(act);
  Slot idx = frame[0];
  if (idx < 0 || idx >= static_cast<Slot>(m.points.size())) return false;
  const SuspensionPoint& p = m.points[static_cast<std::size_t>(idx)];
  if (p.action != action) return false;
  const Terminator& g = m.blocks[static_cast<std::size_t>(p.precondition_block)].term;
  ArenaScope scope;
  Activation a;
  a.locals = scope.alloc(m.locals_slots);
  a.frame = const_cast<Slot*>(frame);  // preconditions are pure
  bind_action_args(*p.stmt, a, args);
  tick(g.pos);
  return eval_preconditions(*p.stmt, a);
}

bool Interpreter::resume(int act, Slot* frame, int action, const Slot* args) {
  const ActionMachine& m = p_.machine(act);
  Slot idx = frame[0];
  if (idx < 0 || idx >= static_cast<Slot>(m.points.size())) return false;
  const SuspensionPoint& p = m.points[static_cast<std::size_t>(idx)];
  if (p.action != action) return false;
  ArenaScope scope;
  Activation a;
  a.locals = scope.alloc(m.locals_slots);
  a.frame = frame;
  bind_action_args(*p.stmt, a, args);
  tick(p.stmt->pos);
  if (!eval_preconditions(*p.stmt, a)) return false;
  run_machine(act, frame, a.locals, p.resume_block);
  return true;
}

void Interpreter::call_function(int fn, const std::vector<const Slot*>& args, Slot* ret) {
  const FuncDecl& f = tm_.ast.functions[static_cast<std::size_t>(fn)];
  ArenaScope scope;
  Slot* locals = scope.alloc(f.locals_size);
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    std::int64_t n = slots(f.params[i].resolved);
    std::copy(args[i], args[i] + n, locals + f.params[i].offset);
  }
  Slot v = invoke(f, nullptr, locals, ret, f.pos);
  if (tm_.types.is_scalar(f.ret_type)) *ret = v;
}

// ---------------------------------------------------------------------------

int resolve_action(const TypedModule& module, int act, const ActionValue& action, std::vector<Slot>& args,
                   bool& in_range) {
  const ActInfo& info = module.acts.at(static_cast<std::size_t>(act));
  int ai = info.action_index(action.name);
  if (ai < 0) {
    throw TypeMismatch("act '" + module.ast.actions[static_cast<std::size_t>(act)].name + "' has no action '" +
                       action.name + "'");
  }
  const ActionInfo& a = info.actions[static_cast<std::size_t>(ai)];
  if (action.args.size() != a.param_types.size()) {
    throw ArityError("action '" + action.name + "' expects " + std::to_string(a.param_types.size()) +
                     " argument(s), got " + std::to_string(action.args.size()));
  }
  args.clear();
  in_range = true;
  for (std::size_t i = 0; i < a.param_types.size(); ++i) {
    const TypeInfo& t = module.types[a.param_types[i]];
    const Scalar& v = action.args[i];
    if (t.kind == TypeInfo::Kind::Bool) {
      if (!std::holds_alternative<bool>(v)) {
        throw TypeMismatch("argument '" + a.param_names[i] + "' of '" + action.name + "' must be Bool");
      }
      args.push_back(std::get<bool>(v) ? 1 : 0);
    } else {
      if (!std::holds_alternative<std::int64_t>(v)) {
        throw TypeMismatch("argument '" + a.param_names[i] + "' of '" + action.name + "' must be Int");
      }
      Slot x = std::get<std::int64_t>(v);
      if (x < t.min || x > t.max) in_range = false;
      args.push_back(x);
    }
  }
  return ai;
}

}  // namespace rb1::detail
