// Direct interpretation of act bodies with an explicit continuation stack,
// used as an oracle for the lowered machines.

#include "interpreter.hpp"
#include "rb1/runtime.hpp"

namespace rb1 {

namespace {

struct Continuation {
  const std::vector<Stmt>* list;
  std::size_t index;
  const Stmt* loop;  // while statement owning `list`, re-tested at its end
};

class ReferenceAct {
 public:
  ReferenceAct(const ProgramPtr& program, int act) : p_(*program), act_(act), it_(*program) {
    const ActDecl& decl = p_.module().ast.actions[static_cast<std::size_t>(act)];
    locals_.assign(static_cast<std::size_t>(decl.locals_size) + 1, 0);
  }

  void construct(const std::vector<Scalar>& args) {
    const TypedModule& tm = p_.module();
    const ActDecl& decl = tm.ast.actions[static_cast<std::size_t>(act_)];
    TypeId type = tm.classes[static_cast<std::size_t>(tm.acts[static_cast<std::size_t>(act_)].class_index)].type;
    frame_ = p_.default_value(type);
    if (args.size() != decl.params.size()) throw ArityError("act '" + decl.name + "' argument count mismatch");
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Scalar& v = args[i];
      Slot s = std::holds_alternative<bool>(v)           ? Slot(std::get<bool>(v))
               : std::holds_alternative<std::int64_t>(v) ? std::get<std::int64_t>(v)
                                                         : detail::from_double(std::get<double>(v));
      it_.store_scalar(decl.params[i].resolved, &frame_[static_cast<std::size_t>(decl.params[i].offset)], s,
                       decl.params[i].pos);
    }
    stack_.push_back({&decl.body, 0, nullptr});
    it_.reset_steps();
    run();
  }

  void apply(const ActionValue& action) {
    std::vector<Slot> args;
    bool in_range = true;
    int a = detail::resolve_action(p_.module(), act_, action, args, in_range);
    const ActInfo& info = p_.module().acts[static_cast<std::size_t>(act_)];
    Slot idx = frame_[0];
    if (!in_range || idx < 0) throw PreconditionViolated(action.name, idx);
    const Stmt& point = *info.points[static_cast<std::size_t>(idx)];
    if (point.name != info.actions[static_cast<std::size_t>(a)].name) throw PreconditionViolated(action.name, idx);
    it_.reset_steps();
    detail::Activation act = activation();
    it_.bind_action_args(point, act, args.data());
    if (!it_.eval_preconditions(point, act)) throw PreconditionViolated(action.name, idx);
    run();
  }

  const std::vector<Slot>& frame() const { return frame_; }

 private:
  detail::Activation activation() {
    detail::Activation a;
    a.locals = locals_.data();
    a.frame = frame_.data();
    return a;
  }

  void run() {
    detail::Activation a = activation();
    while (!stack_.empty()) {
      Continuation& c = stack_.back();
      if (c.index == c.list->size()) {
        if (c.loop) {
          it_.tick(c.loop->pos);
          if (it_.eval_bool(*c.loop->target, a)) {
            c.index = 0;
            continue;
          }
        }
        stack_.pop_back();
        continue;
      }
      const Stmt& s = (*c.list)[c.index++];
      switch (s.kind) {
        case StmtKind::If: {
          it_.tick(s.pos);
          const auto* body = it_.eval_bool(*s.target, a) ? &s.body : &s.else_body;
          stack_.push_back({body, 0, nullptr});
          break;
        }
        case StmtKind::While:
          it_.tick(s.pos);
          if (it_.eval_bool(*s.target, a)) stack_.push_back({&s.body, 0, &s});
          break;
        case StmtKind::Return:
          stack_.clear();
          break;
        case StmtKind::Action:
          frame_[0] = s.point_index;
          return;
        default:
          it_.exec_simple(s, a);
          break;
      }
    }
    frame_[0] = -1;
  }

  const Program& p_;
  int act_;
  detail::Interpreter it_;
  std::vector<Slot> frame_;
  std::vector<Slot> locals_;
  std::vector<Continuation> stack_;
};

}  // namespace

std::vector<std::vector<Slot>> reference_step(const ProgramPtr& program, std::string_view act_name,
                                              const std::vector<ActionValue>& trace,
                                              const std::vector<Scalar>& ctor_args) {
  ReferenceAct ref(program, program->act(act_name));
  std::vector<std::vector<Slot>> snapshots;
  ref.construct(ctor_args);
  snapshots.push_back(ref.frame());
  for (const ActionValue& a : trace) {
    ref.apply(a);
    snapshots.push_back(ref.frame());
  }
  return snapshots;
}

}  // namespace rb1
