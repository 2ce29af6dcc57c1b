#include "rb1/lowering.hpp"

#include <optional>

namespace rb1 {

namespace {

std::optional<bool> constant_condition(const Expr& e) {
  if (e.kind == ExprKind::BoolLit) return e.bool_value;
  if (e.kind == ExprKind::Unary && e.unary == UnaryOp::Not) {
    if (auto inner = constant_condition(e.operands[0])) return !*inner;
  }
  return std::nullopt;
}

Terminator terminator(Terminator::Kind kind) {
  Terminator t;
  t.kind = kind;
  return t;
}

class Lowerer {
 public:
  Lowerer(const TypedModule& tm, ActionMachine& m) : tm_(tm), m_(m) {}

  void run(const ActDecl& act) {
    const ActInfo& info = tm_.acts[static_cast<std::size_t>(m_.act_index)];
    m_.points.resize(info.points.size());
    for (std::size_t a = 0; a < info.actions.size(); ++a) {
      for (int p : info.actions[a].points) m_.points[static_cast<std::size_t>(p)].action = static_cast<int>(a);
    }
    m_.prologue = fresh();
    cur_ = m_.prologue;
    lower_body(act.body);
    seal(terminator(Terminator::Kind::Finish));
    prune();
  }

 private:
  BlockId fresh() {
    m_.blocks.emplace_back();
    return static_cast<BlockId>(m_.blocks.size() - 1);
  }

  // Ends the current block. Statements after a terminator land in a new,
  // possibly unreachable block.
  void seal(Terminator t) {
    m_.blocks[static_cast<std::size_t>(cur_)].term = t;
    cur_ = fresh();
  }

  void jump_to(BlockId target) {
    Terminator t = terminator(Terminator::Kind::Jump);
    t.target = target;
    m_.blocks[static_cast<std::size_t>(cur_)].term = t;
  }

  void branch(const Expr& cond, BlockId yes, BlockId no) {
    Terminator t;
    if (auto c = constant_condition(cond)) {
      t.kind = Terminator::Kind::Jump;
      t.target = *c ? yes : no;
    } else {
      t.kind = Terminator::Kind::Branch;
      t.cond = &cond;
      t.target = yes;
      t.else_target = no;
    }
    t.pos = cond.pos;
    m_.blocks[static_cast<std::size_t>(cur_)].term = t;
  }

  void lower_body(const std::vector<Stmt>& body) {
    for (const Stmt& s : body) lower_stmt(s);
  }

  void lower_stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let:
      case StmtKind::Frame:
      case StmtKind::Assign:
      case StmtKind::ExprStmt:
        m_.blocks[static_cast<std::size_t>(cur_)].stmts.push_back(&s);
        return;
      case StmtKind::Return: {
        Terminator t = terminator(Terminator::Kind::Finish);
        t.pos = s.pos;
        seal(t);
        return;
      }
      case StmtKind::If: {
        BlockId then_b = fresh(), else_b = fresh(), join = fresh();
        branch(*s.target, then_b, else_b);
        cur_ = then_b;
        lower_body(s.body);
        jump_to(join);
        cur_ = else_b;
        lower_body(s.else_body);
        jump_to(join);
        cur_ = join;
        return;
      }
      case StmtKind::While: {
        BlockId head = fresh(), body = fresh(), exit = fresh();
        jump_to(head);
        cur_ = head;
        branch(*s.target, body, exit);
        cur_ = body;
        lower_body(s.body);
        jump_to(head);
        cur_ = exit;
        return;
      }
      case StmtKind::Action: {
        SuspensionPoint& p = m_.points[static_cast<std::size_t>(s.point_index)];
        p.index = s.point_index;
        p.action_name = s.name;
        p.stmt = &s;
        Terminator susp = terminator(Terminator::Kind::Suspend);
        susp.point = s.point_index;
        susp.pos = s.pos;
        m_.blocks[static_cast<std::size_t>(cur_)].term = susp;
        p.precondition_block = fresh();
        p.resume_block = fresh();
        Terminator guard = terminator(Terminator::Kind::Guard);
        guard.point = s.point_index;
        guard.target = p.resume_block;
        guard.pos = s.pos;
        m_.blocks[static_cast<std::size_t>(p.precondition_block)].term = guard;
        cur_ = p.resume_block;
        return;
      }
    }
  }

  static void successors(const Terminator& t, std::vector<BlockId>& out) {
    switch (t.kind) {
      case Terminator::Kind::Branch:
        out.push_back(t.else_target);
        [[fallthrough]];
      case Terminator::Kind::Jump:
      case Terminator::Kind::Guard:
        out.push_back(t.target);
        break;
      default:
        break;
    }
  }

  void prune() {
    std::vector<bool> live(m_.blocks.size(), false);
    std::vector<bool> point_reached(m_.points.size(), false);
    std::vector<BlockId> work{m_.prologue};
    live[static_cast<std::size_t>(m_.prologue)] = true;
    auto drain = [&] {
      while (!work.empty()) {
        BlockId b = work.back();
        work.pop_back();
        const Terminator& t = m_.blocks[static_cast<std::size_t>(b)].term;
        if (t.kind == Terminator::Kind::Suspend) point_reached[static_cast<std::size_t>(t.point)] = true;
        std::vector<BlockId> next;
        successors(t, next);
        for (BlockId n : next) {
          if (!live[static_cast<std::size_t>(n)]) {
            live[static_cast<std::size_t>(n)] = true;
            work.push_back(n);
          }
        }
      }
    };
    drain();
    // Points stay addressable (resume_idx may be set externally), so their
    // guard and resume blocks are kept even when no suspend reaches them.
    for (SuspensionPoint& p : m_.points) {
      if (!live[static_cast<std::size_t>(p.precondition_block)]) {
        live[static_cast<std::size_t>(p.precondition_block)] = true;
        work.push_back(p.precondition_block);
      }
    }
    drain();
    std::vector<BlockId> remap(m_.blocks.size(), -1);
    std::vector<Block> kept;
    for (std::size_t b = 0; b < m_.blocks.size(); ++b) {
      if (!live[b]) continue;
      remap[b] = static_cast<BlockId>(kept.size());
      kept.push_back(std::move(m_.blocks[b]));
    }
    for (Block& b : kept) {
      if (b.term.target >= 0) b.term.target = remap[static_cast<std::size_t>(b.term.target)];
      if (b.term.else_target >= 0) b.term.else_target = remap[static_cast<std::size_t>(b.term.else_target)];
    }
    m_.blocks = std::move(kept);
    m_.prologue = remap[static_cast<std::size_t>(m_.prologue)];
    for (std::size_t i = 0; i < m_.points.size(); ++i) {
      SuspensionPoint& p = m_.points[i];
      p.precondition_block = remap[static_cast<std::size_t>(p.precondition_block)];
      p.resume_block = remap[static_cast<std::size_t>(p.resume_block)];
      p.reachable = point_reached[i];
      if (!p.reachable) {
        m_.warnings.push_back({p.stmt->pos, "action statement '" + p.action_name + "' is unreachable"});
      }
    }
  }

  const TypedModule& tm_;
  ActionMachine& m_;
  BlockId cur_ = 0;
};

}  // namespace

ActionMachine lower_action(const TypedModule& module, int act_index) {
  const ActDecl& act = module.ast.actions.at(static_cast<std::size_t>(act_index));
  const ActInfo& info = module.acts[static_cast<std::size_t>(act_index)];
  const ClassInfo& cls = module.classes[static_cast<std::size_t>(info.class_index)];
  ActionMachine m;
  m.act_index = act_index;
  m.class_index = info.class_index;
  m.name = act.name;
  m.class_name = cls.name;
  for (const FieldInfo& f : cls.fields) m.frame_layout.push_back({f.name, f.type, f.slot_offset, f.byte_offset});
  m.frame_slots = cls.slots;
  m.frame_bytes = cls.bytes;
  m.locals_slots = act.locals_size;
  Lowerer(module, m).run(act);
  return m;
}

ActionFlowGraph build_afg(const ActionMachine& machine) {
  ActionFlowGraph g;
  g.name = machine.class_name;
  for (const SuspensionPoint& p : machine.points) g.nodes.push_back({p.index, p.action_name});

  // Walks the block graph from `start` without crossing a suspension.
  auto explore = [&](BlockId start, auto&& on_suspend, auto&& on_finish) {
    std::vector<bool> seen(machine.blocks.size(), false);
    std::vector<BlockId> work{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!work.empty()) {
      const Terminator& t = machine.blocks[static_cast<std::size_t>(work.back())].term;
      work.pop_back();
      switch (t.kind) {
        case Terminator::Kind::Suspend:
          on_suspend(t.point);
          continue;
        case Terminator::Kind::Finish:
          on_finish();
          continue;
        default:
          break;
      }
      for (BlockId n : {t.target, t.else_target}) {
        if (n >= 0 && !seen[static_cast<std::size_t>(n)]) {
          seen[static_cast<std::size_t>(n)] = true;
          work.push_back(n);
        }
      }
    }
  };

  explore(machine.prologue, [&](int q) { g.entry_nodes.insert(q); }, [] {});
  for (const SuspensionPoint& p : machine.points) {
    if (!p.reachable) continue;
    explore(
        p.resume_block, [&](int q) { g.edges.insert({p.index, q}); }, [&] { g.exit_nodes.insert(p.index); });
  }
  return g;
}

std::string export_dot(const ActionFlowGraph& afg) {
  auto id = [&](int index) {
    return afg.nodes[static_cast<std::size_t>(index)].action + "_" + std::to_string(index);
  };
  std::string out = "digraph " + afg.name + " {\n";
  for (const auto& n : afg.nodes) {
    bool entry = afg.entry_nodes.count(n.index) > 0;
    bool exit = afg.exit_nodes.count(n.index) > 0;
    std::string attrs;
    if (entry && exit) {
      attrs = "shape=doublecircle, peripheries=3";
    } else if (entry) {
      attrs = "shape=doublecircle";
    } else if (exit) {
      attrs = "shape=circle, peripheries=2";
    } else {
      attrs = "shape=circle";
    }
    out += "  " + id(n.index) + " [label=\"" + n.action + "\", " + attrs + "];\n";
  }
  for (const auto& [a, b] : afg.edges) out += "  " + id(a) + " -> " + id(b) + ";\n";
  out += "}\n";
  return out;
}

}  // namespace rb1
