#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rb1/ast.hpp"

namespace rb1 {

struct TypeInfo {
  enum class Kind { Void, Bool, Int, Float, Bounded, Array, Class };

  Kind kind = Kind::Void;
  std::int64_t min = 0;
  std::int64_t max = 0;
  TypeId elem = kNoType;
  std::int64_t len = 0;
  int class_index = -1;

  friend bool operator==(const TypeInfo&, const TypeInfo&) = default;
};

/// Interned types. The first four ids are fixed.
class TypeTable {
 public:
  static constexpr TypeId kVoid = 0;
  static constexpr TypeId kBool = 1;
  static constexpr TypeId kInt = 2;
  static constexpr TypeId kFloat = 3;

  TypeTable();

  TypeId bounded(std::int64_t min, std::int64_t max);
  TypeId array(TypeId elem, std::int64_t len);
  TypeId class_type(int class_index);

  const TypeInfo& operator[](TypeId id) const { return types_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return types_.size(); }

  bool is_integral(TypeId id) const {
    auto k = (*this)[id].kind;
    return k == TypeInfo::Kind::Int || k == TypeInfo::Kind::Bounded;
  }
  bool is_scalar(TypeId id) const {
    auto k = (*this)[id].kind;
    return k == TypeInfo::Kind::Bool || k == TypeInfo::Kind::Int || k == TypeInfo::Kind::Float ||
           k == TypeInfo::Kind::Bounded;
  }

 private:
  TypeId intern(const TypeInfo& info);
  std::vector<TypeInfo> types_;
};

struct FieldInfo {
  std::string name;
  TypeId type = kNoType;
  std::int64_t slot_offset = 0;
  std::int64_t byte_offset = 0;
};

struct MethodSig {
  enum class Kind { CanPredicate, ActionApply, IsDone, UserFunction };

  std::string name;
  std::vector<std::pair<std::string, TypeId>> params;
  TypeId ret = TypeTable::kVoid;
  Kind kind = Kind::UserFunction;
  bool mutates_self = false;
};

struct ClassInfo {
  enum class Origin { Declared, SynthesizedFromAct };

  std::string name;
  Origin origin = Origin::Declared;
  std::vector<FieldInfo> fields;
  std::vector<MethodSig> methods;
  int decl_index = -1;  // ClsDecl index, or ActDecl index when synthesized
  TypeId type = kNoType;
  std::int64_t slots = 0;
  std::int64_t bytes = 0;
  bool layout_done = false;

  const FieldInfo* field(std::string_view name) const;
  int method_index(std::string_view name) const;
};

/// One distinct action name of an act; several suspension points may share it.
struct ActionInfo {
  std::string name;
  std::vector<std::string> param_names;
  std::vector<TypeId> param_types;
  std::vector<int> points;
};

struct ActInfo {
  int decl_index = -1;
  int class_index = -1;
  std::vector<ActionInfo> actions;
  std::vector<const Stmt*> points;  // by lexical suspension index
  MethodSig constructor;            // free function named after the act

  int action_index(std::string_view name) const;
};

/// Typechecked module. Owns the annotated AST; statement pointers held by
/// ActInfo and by lowered machines point into it, so it is neither copied
/// nor moved once built (hence the unique_ptr factory).
struct TypedModule {
  ModuleAst ast;
  TypeTable types;
  std::vector<ClassInfo> classes;
  std::vector<MethodSig> functions;  // parallel to ast.functions
  std::vector<ActInfo> acts;         // parallel to ast.actions
  std::vector<int> action_order;     // ActDecl indices, dependencies first

  TypedModule() = default;
  TypedModule(const TypedModule&) = delete;
  TypedModule& operator=(const TypedModule&) = delete;

  std::int64_t slot_count(TypeId id) const;
  std::int64_t byte_size(TypeId id) const;
  std::string type_name(TypeId id) const;

  const ClassInfo& class_of(TypeId id) const { return classes.at(static_cast<std::size_t>(types[id].class_index)); }
  int find_act(std::string_view name) const;
  int find_function(std::string_view name) const;
  int find_class(std::string_view name) const;
  /// Act whose synthesized class is `class_index`, or -1.
  int act_of_class(int class_index) const;
};

struct BuiltinInfo {
  const char* name;
  std::vector<TypeId> params;
  TypeId ret;
};
const std::vector<BuiltinInfo>& builtins();

/// Dependency order of acts: an act appears after every act whose class it
/// names, constructs, or reaches through a declared class or function
/// signature. Throws ActionCycleError naming the cycle.
std::vector<int> order_actions(const ModuleAst& module);

std::unique_ptr<TypedModule> typecheck(ModuleAst module);

}  // namespace rb1
