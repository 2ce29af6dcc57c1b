#pragma once

#include <bit>
#include <cstring>
#include <vector>

#include "rb1/runtime.hpp"

namespace rb1::detail {

/// Chunked bump allocator for activation locals and temporaries. Pointers
/// stay valid until the scope that allocated them ends.
class Arena {
 public:
  struct Mark {
    std::size_t chunk;
    std::size_t used;
  };

  Mark mark() const { return {current_, chunks_.empty() ? 0 : chunks_[current_].used}; }
  void release(Mark m);
  Slot* alloc(std::int64_t n);

  static Arena& local();

 private:
  struct Chunk {
    std::vector<Slot> data;
    std::size_t used = 0;
  };
  std::vector<Chunk> chunks_;
  std::size_t current_ = 0;
};

class ArenaScope {
 public:
  ArenaScope() : arena_(Arena::local()), mark_(arena_.mark()) {}
  ~ArenaScope() { arena_.release(mark_); }
  ArenaScope(const ArenaScope&) = delete;
  ArenaScope& operator=(const ArenaScope&) = delete;
  Slot* alloc(std::int64_t n) { return arena_.alloc(n); }

 private:
  Arena& arena_;
  Arena::Mark mark_;
};

struct Activation {
  Slot* locals = nullptr;
  Slot* frame = nullptr;
  Slot* self = nullptr;
  Slot* ret_dst = nullptr;  // aggregate return target
  Slot ret_val = 0;
  TypeId ret_type = kNoType;
};

/// Evaluates typed statements and expressions over slot storage. One
/// instance per top-level operation; counts steps and call depth.
class Interpreter {
 public:
  explicit Interpreter(const Program& program) : p_(program), tm_(program.module()) {}

  // Machine operations on a frame of act `act`.
  // `frame` holds the default image with parameters already stored.
  void construct(int act, Slot* frame);
  bool guard(int act, const Slot* frame, int action, const Slot* args);
  // Returns false, leaving the frame untouched, when the guard fails.
  bool resume(int act, Slot* frame, int action, const Slot* args);

  // Calls a free function on argument images already converted to the
  // parameter types; `ret` receives the result image.
  void call_function(int fn, const std::vector<const Slot*>& args, Slot* ret);

  // Shared pieces used by the reference interpreter.
  enum class Flow { Normal, Return };
  Flow exec_simple(const Stmt& s, Activation& a);
  bool eval_bool(const Expr& e, Activation& a) { return eval_scalar(e, a) != 0; }
  bool eval_preconditions(const Stmt& point, Activation& a);
  void bind_action_args(const Stmt& point, Activation& a, const Slot* args);
  void tick(SourcePos pos);
  void reset_steps() { steps_ = 0; }

  void store_scalar(TypeId dst_type, Slot* dst, Slot v, SourcePos pos);

 private:
  Flow exec_body(const std::vector<Stmt>& body, Activation& a);
  Flow exec_stmt(const Stmt& s, Activation& a);

  Slot eval_scalar(const Expr& e, Activation& a);
  void eval_store(TypeId dst_type, Slot* dst, const Expr& e, Activation& a);
  Slot invoke(const FuncDecl& f, Slot* self, Slot* locals, Slot* dst, SourcePos pos);
  void eval_action_args(const Expr& e, Activation& a, std::vector<Slot>& out, bool& in_range);
  // Pointer to the storage of `e`; non-place expressions are evaluated
  // into arena temporaries owned by the caller's scope.
  Slot* eval_ref(const Expr& e, Activation& a, ArenaScope& scope);
  void eval_into(const Expr& e, Activation& a, Slot* dst);
  Slot eval_binary(const Expr& e, Activation& a);
  Slot eval_builtin(const Expr& e, Activation& a);
  // Evaluates a call of any kind; scalar results are returned, aggregate
  // results written to `dst`.
  Slot eval_call(const Expr& e, Activation& a, Slot* dst);
  void run_machine(int act, Slot* frame, Slot* locals, BlockId start);
  void enter(SourcePos pos);
  void leave() { --depth_; }
  bool values_equal(TypeId type, const Slot* a, const Slot* b) const;
  std::int64_t slots(TypeId t) const { return tm_.slot_count(t); }

  const Program& p_;
  const TypedModule& tm_;
  std::int64_t steps_ = 0;
  int depth_ = 0;
};

inline Slot from_double(double d) { return std::bit_cast<Slot>(d); }
inline double to_double(Slot s) { return std::bit_cast<double>(s); }

}  // namespace rb1::detail

namespace rb1::detail {

/// Maps an external action onto (action index, argument slots). Throws
/// TypeMismatch/ArityError for malformed values; `in_range` is cleared
/// when a bounded argument lies outside its declared range.
int resolve_action(const TypedModule& module, int act, const ActionValue& action, std::vector<Slot>& args,
                   bool& in_range);

}  // namespace rb1::detail
