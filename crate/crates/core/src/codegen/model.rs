//! Everything the templates need, resolved from the component model and a
//! lock plan: item names, field lists, lock representation per celltype,
//! lock objects and tasks.

use std::collections::BTreeMap;

use serde::Serialize;

use super::names::{camel, snake, upper, Namer};
use crate::callflow::CallFlowSet;
use crate::cdl::{Direction, Literal, ScalarType};
use crate::model::ComponentModel;
use crate::optimizer::{DispatchMode, LockKind, LockPlan};

/// Stem of the instances file; no module may take it.
pub const SYSTEM_STEM: &str = "system";

/// Name of the guard-returning accessor every entry function calls first.
pub const ACCESSOR: &str = "get_cell_ref";

/// Representation of a celltype's lock field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LockField {
    /// No field; the accessor hands out a no-op guard.
    Removed,
    Semaphore,
    Mutex,
    /// Abstract lock-manager handle; unlocked cells point at a dummy.
    Dynamic,
}

impl LockField {
    fn from_mode(mode: DispatchMode) -> Self {
        match mode {
            DispatchMode::FieldRemoved => LockField::Removed,
            DispatchMode::DirectHandle(LockKind::BinarySemaphore) => LockField::Semaphore,
            DispatchMode::DirectHandle(LockKind::CeilingMutex { .. }) => LockField::Mutex,
            DispatchMode::DirectHandle(LockKind::NoLock) => {
                unreachable!("direct handle of no lock is classified as removed")
            }
            DispatchMode::DynamicDispatch => LockField::Dynamic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamGen {
    pub name: String,
    pub ty: ScalarType,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionGen {
    pub name: String,
    pub ret: Option<ScalarType>,
    pub params: Vec<ParamGen>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureGen {
    pub cdl_name: String,
    pub trait_name: String,
    pub functions: Vec<FunctionGen>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallPortGen {
    pub cdl_name: String,
    pub field: String,
    /// Type parameter standing for the joined entry type.
    pub generic: String,
    pub signature_trait: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberGen {
    pub cdl_name: String,
    pub field: String,
    pub ty: ScalarType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryGen {
    pub cdl_name: String,
    pub struct_name: String,
    pub signature: String,
    pub signature_trait: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryInstance {
    pub entry: String,
    pub static_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGen {
    pub cdl_name: String,
    pub static_name: String,
    /// Concrete types for the celltype's type parameters, in call-port order.
    pub type_args: Vec<String>,
    pub var_static: Option<String>,
    pub lock_object: Option<String>,
    pub attr_values: Vec<(String, Literal, ScalarType)>,
    pub var_values: Vec<(String, Literal, ScalarType)>,
    /// (call-port field, static of the joined entry instance)
    pub bindings: Vec<(String, String)>,
    pub entry_instances: Vec<EntryInstance>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CelltypeGen {
    pub cdl_name: String,
    pub module: String,
    pub struct_name: String,
    pub call_ports: Vec<CallPortGen>,
    pub attrs: Vec<MemberGen>,
    pub vars: Vec<MemberGen>,
    pub var_struct: Option<String>,
    pub sync_struct: Option<String>,
    pub lock_field: LockField,
    pub guard_name: String,
    pub accessor: String,
    pub entries: Vec<EntryGen>,
    pub cells: Vec<CellGen>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockObjectKind {
    Semaphore,
    Mutex {
        ceiling: u32,
    },
    /// No-op lock for an unlocked cell of a dynamically dispatched celltype.
    Dummy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockObject {
    pub name: String,
    pub cell: String,
    pub kind: LockObjectKind,
    /// Kernel object id; `None` for dummies.
    pub rtos_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskGen {
    pub cdl_name: String,
    pub id: String,
    pub body: String,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationModel {
    pub signatures: Vec<SignatureGen>,
    pub celltypes: Vec<CelltypeGen>,
    pub locks: Vec<LockObject>,
    /// Sorted by task name.
    pub tasks: Vec<TaskGen>,
}

impl GenerationModel {
    pub fn celltype(&self, cdl_name: &str) -> Option<&CelltypeGen> {
        self.celltypes.iter().find(|c| c.cdl_name == cdl_name)
    }

    pub fn lock(&self, name: &str) -> Option<&LockObject> {
        self.locks.iter().find(|l| l.name == name)
    }

    pub fn sync_wrapper_count(&self) -> usize {
        self.celltypes
            .iter()
            .filter(|c| c.sync_struct.is_some())
            .count()
    }
}

/// Resolves names and lock representation. `flows` supplies the task list
/// for the RTOS configuration; without it no tasks are emitted.
pub fn build_generation_model(
    model: &ComponentModel,
    plan: &LockPlan,
    flows: Option<&CallFlowSet>,
) -> GenerationModel {
    let mut global = Namer::new();
    global.reserve(SYSTEM_STEM);

    let mut sig_traits = BTreeMap::new();
    let signatures: Vec<SignatureGen> = model
        .signatures
        .values()
        .map(|s| {
            let trait_name = global.claim(camel(s.name.as_str()));
            sig_traits.insert(s.name.name.clone(), trait_name.clone());
            let mut fnames = Namer::new();
            fnames.reserve(ACCESSOR);
            SignatureGen {
                cdl_name: s.name.name.clone(),
                trait_name,
                functions: s
                    .functions
                    .iter()
                    .map(|f| {
                        let mut pnames = Namer::new();
                        FunctionGen {
                            name: fnames.claim(snake(f.name.as_str())),
                            ret: f.ret.as_ref().map(|r| scalar(r.as_str())),
                            params: f
                                .params
                                .iter()
                                .map(|p| ParamGen {
                                    name: pnames.claim(snake(p.name.as_str())),
                                    ty: scalar(p.ty.as_str()),
                                    direction: p.direction,
                                })
                                .collect(),
                        }
                    })
                    .collect(),
            }
        })
        .collect();

    // Item names for every celltype first, so cells can refer to other
    // celltypes' entry structs regardless of order.
    let mut celltypes: Vec<CelltypeGen> = model
        .celltypes
        .values()
        .map(|ct| {
            let struct_name = global.claim(camel(ct.name.as_str()));
            let module = global.claim(snake(ct.name.as_str()));
            let mut members = Namer::new();
            members.reserve("ex_ctrl_ref");
            members.reserve("variable");
            let mut generics = Namer::new();
            let call_ports = ct
                .calls
                .iter()
                .map(|p| CallPortGen {
                    cdl_name: p.name.name.clone(),
                    field: members.claim(snake(p.name.as_str())),
                    generic: generics.claim(format!("{}T", camel(p.name.as_str()))),
                    signature_trait: sig_traits[p.signature.as_str()].clone(),
                })
                .collect();
            let attrs = ct
                .attrs
                .iter()
                .map(|a| MemberGen {
                    cdl_name: a.name.name.clone(),
                    field: members.claim(snake(a.name.as_str())),
                    ty: scalar(a.ty.as_str()),
                })
                .collect();
            let mut var_fields = Namer::new();
            let vars: Vec<MemberGen> = ct
                .vars
                .iter()
                .map(|v| MemberGen {
                    cdl_name: v.name.name.clone(),
                    field: var_fields.claim(snake(v.name.as_str())),
                    ty: scalar(v.ty.as_str()),
                })
                .collect();
            let (var_struct, sync_struct) = if vars.is_empty() {
                (None, None)
            } else {
                (
                    Some(global.claim(format!("{struct_name}Var"))),
                    Some(global.claim(format!("Sync{struct_name}Var"))),
                )
            };
            let guard_name = global.claim(format!("LockGuardFor{struct_name}"));
            let entries = ct
                .entries
                .iter()
                .map(|e| EntryGen {
                    cdl_name: e.name.name.clone(),
                    struct_name: global.claim(format!(
                        "{}For{}",
                        camel(e.name.as_str()),
                        struct_name
                    )),
                    signature: e.signature.name.clone(),
                    signature_trait: sig_traits[e.signature.as_str()].clone(),
                })
                .collect();
            let mode = plan
                .per_celltype
                .get(ct.name.as_str())
                .copied()
                .unwrap_or(DispatchMode::FieldRemoved);
            CelltypeGen {
                cdl_name: ct.name.name.clone(),
                module,
                struct_name,
                call_ports,
                attrs,
                vars,
                var_struct,
                sync_struct,
                lock_field: LockField::from_mode(mode),
                guard_name,
                accessor: ACCESSOR.to_string(),
                entries,
                cells: Vec::new(),
            }
        })
        .collect();

    // cell statics
    let mut statics: BTreeMap<String, (String, Option<String>, Vec<EntryInstance>)> =
        BTreeMap::new();
    for cell in model.cells.values() {
        let ct = celltypes
            .iter()
            .find(|c| c.cdl_name == cell.celltype)
            .unwrap();
        let base = upper(&cell.name);
        let static_name = global.claim(base.clone());
        let var_static = ct
            .var_struct
            .as_ref()
            .map(|_| global.claim(format!("{base}_VAR")));
        let entries = ct
            .entries
            .iter()
            .map(|e| EntryInstance {
                entry: e.cdl_name.clone(),
                static_name: global.claim(format!("{base}_{}", upper(&e.cdl_name))),
            })
            .collect();
        statics.insert(cell.name.clone(), (static_name, var_static, entries));
    }

    // lock objects and kernel ids
    let mut rtos = Namer::new();
    let mut locks = Vec::new();
    let mut lock_of_cell = BTreeMap::new();
    for cell in model.cells.values() {
        let ct = celltypes
            .iter()
            .find(|c| c.cdl_name == cell.celltype)
            .unwrap();
        let kind = match (ct.lock_field, plan.kind(&cell.name)) {
            (LockField::Removed, _) => continue,
            (_, LockKind::BinarySemaphore) => LockObjectKind::Semaphore,
            (_, LockKind::CeilingMutex { ceiling }) => LockObjectKind::Mutex { ceiling: ceiling.0 },
            (_, LockKind::NoLock) => LockObjectKind::Dummy,
        };
        let base = upper(&cell.name);
        let name = global.claim(format!("{base}_EX_CTRL"));
        let rtos_id = match kind {
            LockObjectKind::Semaphore => Some(rtos.claim(format!("SEM_{base}"))),
            LockObjectKind::Mutex { .. } => Some(rtos.claim(format!("MTX_{base}"))),
            LockObjectKind::Dummy => None,
        };
        lock_of_cell.insert(cell.name.clone(), name.clone());
        locks.push(LockObject {
            name,
            cell: cell.name.clone(),
            kind,
            rtos_id,
        });
    }

    let tasks = flows.map_or_else(Vec::new, |f| {
        let mut ts: Vec<_> = f.tasks.iter().collect();
        ts.sort_by(|a, b| a.name.cmp(&b.name));
        ts.into_iter()
            .map(|t| TaskGen {
                cdl_name: t.name.clone(),
                id: rtos.claim(upper(&t.name)),
                body: global.claim(format!("{}_body", snake(&t.name))),
                priority: t.priority.0,
            })
            .collect()
    });

    let type_args = |cell: &str| type_args_of(model, &celltypes, cell);
    let mut cells_by_ct: BTreeMap<String, Vec<CellGen>> = BTreeMap::new();
    for cell in model.cells.values() {
        let ct = celltypes
            .iter()
            .find(|c| c.cdl_name == cell.celltype)
            .unwrap();
        let decl = &model.celltypes[&cell.celltype];
        let (static_name, var_static, entry_instances) = statics[&cell.name].clone();
        let attr_values = ct
            .attrs
            .iter()
            .map(|a| (a.field.clone(), cell.attr_values[&a.cdl_name].clone(), a.ty))
            .collect();
        let var_values = ct
            .vars
            .iter()
            .zip(&decl.vars)
            .map(|(v, d)| (v.field.clone(), d.init.value.clone(), v.ty))
            .collect();
        let bindings = ct
            .call_ports
            .iter()
            .map(|p| {
                let j = model
                    .joins_from(&cell.name)
                    .find(|j| j.caller.port == p.cdl_name)
                    .expect("every call port is joined");
                let target = &statics[&j.callee.cell].2;
                let inst = target.iter().find(|e| e.entry == j.callee.port).unwrap();
                (p.field.clone(), inst.static_name.clone())
            })
            .collect();
        cells_by_ct
            .entry(cell.celltype.clone())
            .or_default()
            .push(CellGen {
                cdl_name: cell.name.clone(),
                static_name,
                type_args: type_args(&cell.name),
                var_static,
                lock_object: lock_of_cell.get(&cell.name).cloned(),
                attr_values,
                var_values,
                bindings,
                entry_instances,
            });
    }
    for ct in &mut celltypes {
        ct.cells = cells_by_ct.remove(&ct.cdl_name).unwrap_or_default();
    }

    GenerationModel {
        signatures,
        celltypes,
        locks,
        tasks,
    }
}

/// Concrete type arguments of `cell`: for each call port, the entry struct
/// it is joined to, itself instantiated with that cell's arguments.
fn type_args_of(model: &ComponentModel, celltypes: &[CelltypeGen], cell: &str) -> Vec<String> {
    let inst = &model.cells[cell];
    let ct = celltypes
        .iter()
        .find(|c| c.cdl_name == inst.celltype)
        .unwrap();
    ct.call_ports
        .iter()
        .map(|p| {
            let j = model
                .joins_from(cell)
                .find(|j| j.caller.port == p.cdl_name)
                .expect("every call port is joined");
            let target_ct = celltypes
                .iter()
                .find(|c| c.cdl_name == model.cells[&j.callee.cell].celltype)
                .unwrap();
            let entry = target_ct
                .entries
                .iter()
                .find(|e| e.cdl_name == j.callee.port)
                .unwrap();
            let args = type_args_of(model, celltypes, &j.callee.cell);
            if args.is_empty() {
                entry.struct_name.clone()
            } else {
                format!("{}<{}>", entry.struct_name, args.join(", "))
            }
        })
        .collect()
}

fn scalar(name: &str) -> ScalarType {
    ScalarType::from_name(name).expect("types are validated before generation")
}
