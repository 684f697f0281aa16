//! Rendering a [`GenerationModel`] into files.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::Serialize;

use super::model::{
    CelltypeGen, FunctionGen, GenerationModel, LockField, LockObjectKind, SYSTEM_STEM,
};
use super::names::{snake, Namer, RESERVED};
use super::templates::{self, TemplateError, TemplateSet};
use crate::cdl::{Direction, Literal, ScalarType};

pub const GEN_DIR: &str = "gen";
pub const USER_DIR: &str = "src_user";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FileKind {
    Scaffolding,
    UserStub,
    RtosConfig,
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFile {
    pub kind: FileKind,
    pub text: String,
}

/// Output files keyed by path relative to the output directory, always with
/// `/` separators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmittedFileSet {
    pub files: BTreeMap<String, EmittedFile>,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct WriteSummary {
    pub written: Vec<String>,
    /// User stubs left alone because the file already existed.
    pub kept: Vec<String>,
}

impl EmittedFileSet {
    pub fn insert(&mut self, path: impl Into<String>, kind: FileKind, text: String) {
        self.files.insert(path.into(), EmittedFile { kind, text });
    }

    pub fn merge(&mut self, other: EmittedFileSet) {
        self.files.extend(other.files);
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(|f| f.text.as_str())
    }

    pub fn of_kind(&self, kind: FileKind) -> impl Iterator<Item = (&str, &str)> {
        self.files
            .iter()
            .filter(move |(_, f)| f.kind == kind)
            .map(|(p, f)| (p.as_str(), f.text.as_str()))
    }

    /// Writes every file under `out`. User stubs that already exist are never
    /// overwritten.
    pub fn write_to(&self, out: &Path) -> io::Result<WriteSummary> {
        let mut summary = WriteSummary::default();
        for (rel, file) in &self.files {
            let path = out.join(rel);
            if file.kind == FileKind::UserStub && path.exists() {
                summary.kept.push(rel.clone());
                continue;
            }
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, &file.text)?;
            summary.written.push(rel.clone());
        }
        Ok(summary)
    }
}

#[derive(Serialize)]
struct Generic {
    name: String,
    bound: String,
}

#[derive(Serialize)]
struct Field {
    field: String,
    ty: String,
}

#[derive(Serialize)]
struct Value {
    field: String,
    value: String,
}

#[derive(Serialize)]
struct BindingCtx {
    field: String,
    target: String,
}

#[derive(Serialize)]
struct EntryCtx {
    struct_name: String,
}

#[derive(Serialize)]
struct EntryStaticCtx {
    static_name: String,
    struct_name: String,
}

#[derive(Serialize)]
struct CellCtx {
    static_name: String,
    type_args: String,
    var_static: String,
    lock_object: String,
    attrs: Vec<Value>,
    vars: Vec<Value>,
    bindings: Vec<BindingCtx>,
    entries: Vec<EntryStaticCtx>,
}

#[derive(Serialize)]
struct CelltypeCtx {
    has_extern: bool,
    extern_names: String,
    struct_name: String,
    has_generics: bool,
    generics: Vec<Generic>,
    call_ports: Vec<Field>,
    attrs: Vec<Field>,
    vars: Vec<Field>,
    has_vars: bool,
    var_struct: String,
    sync_struct: String,
    has_lock: bool,
    lock_ty: String,
    guard_name: String,
    accessor: String,
    entries: Vec<EntryCtx>,
    cells: Vec<CellCtx>,
}

#[derive(Serialize)]
struct ParamCtx {
    name: String,
    ty: String,
}

#[derive(Serialize)]
struct FunctionCtx {
    name: String,
    params: Vec<ParamCtx>,
    has_ret: bool,
    ret: String,
}

#[derive(Serialize)]
struct SignatureCtx {
    trait_name: String,
    functions: Vec<FunctionCtx>,
}

#[derive(Serialize)]
struct LockCtx {
    name: String,
    ty: String,
    rtos_id: String,
}

#[derive(Serialize)]
struct SystemCtx {
    has_extern: bool,
    extern_names: String,
    modules: Vec<String>,
    signatures: Vec<SignatureCtx>,
    has_locks: bool,
    locks: Vec<LockCtx>,
}

#[derive(Serialize)]
struct TaskCtx {
    id: String,
    body: String,
    priority: u32,
}

#[derive(Serialize)]
struct KernelObjCtx {
    id: String,
    ceiling: u32,
}

#[derive(Serialize)]
struct ConfigCtx {
    has_extern: bool,
    extern_names: String,
    tasks: Vec<TaskCtx>,
    semaphores: Vec<KernelObjCtx>,
    mutexes: Vec<KernelObjCtx>,
}

#[derive(Serialize)]
struct StubCtx {
    has_extern: bool,
    extern_names: String,
    celltype: String,
    entry: String,
    signature_trait: String,
    entry_struct: String,
    has_generics: bool,
    generics: Vec<Generic>,
    accessor: String,
    functions: Vec<FunctionCtx>,
}

/// Identifier-like words of a type expression, minus keywords.
fn type_idents(ty: &str) -> impl Iterator<Item = String> + '_ {
    ty.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter(|w| {
            !w.is_empty() && !RESERVED.contains(w) && !w.starts_with(|c: char| c.is_ascii_digit())
        })
        .map(str::to_string)
}

fn extern_list(names: BTreeSet<String>) -> (bool, String) {
    (
        !names.is_empty(),
        names.into_iter().collect::<Vec<_>>().join(", "),
    )
}

fn literal(lit: &Literal, ty: ScalarType) -> String {
    match (lit, ty) {
        (Literal::Int(v), ScalarType::Float32 | ScalarType::Float64) => format!("{v}.0"),
        _ => lit.to_string(),
    }
}

fn lock_ty_key(field: LockField) -> Option<&'static str> {
    match field {
        LockField::Removed => None,
        LockField::Semaphore => Some("semaphore"),
        LockField::Mutex => Some("mutex"),
        LockField::Dynamic => Some("dynamic"),
    }
}

fn lock_object_key(kind: LockObjectKind) -> &'static str {
    match kind {
        LockObjectKind::Semaphore => "semaphore",
        LockObjectKind::Mutex { .. } => "mutex",
        LockObjectKind::Dummy => "dummy",
    }
}

fn generics(ct: &CelltypeGen) -> Vec<Generic> {
    ct.call_ports
        .iter()
        .map(|p| Generic {
            name: p.generic.clone(),
            bound: p.signature_trait.clone(),
        })
        .collect()
}

fn function_ctx(f: &FunctionGen, ts: &TemplateSet) -> Result<FunctionCtx, TemplateError> {
    let params = f
        .params
        .iter()
        .map(|p| {
            let base = ts.scalar(p.ty)?;
            let ty = match p.direction {
                Direction::In => base.to_string(),
                Direction::Out | Direction::InOut => format!("{} {base}", ts.name("by_ref")?),
            };
            Ok(ParamCtx {
                name: p.name.clone(),
                ty,
            })
        })
        .collect::<Result<_, TemplateError>>()?;
    Ok(FunctionCtx {
        name: f.name.clone(),
        params,
        has_ret: f.ret.is_some(),
        ret: match f.ret {
            Some(t) => ts.scalar(t)?.to_string(),
            None => String::new(),
        },
    })
}

fn celltype_ctx(ct: &CelltypeGen, ts: &TemplateSet) -> Result<CelltypeCtx, TemplateError> {
    let lock_ty = match lock_ty_key(ct.lock_field) {
        Some(k) => ts.name(k)?.to_string(),
        None => String::new(),
    };
    let mut ext = BTreeSet::new();
    if !ct.vars.is_empty() {
        ext.extend(["UnsafeCell".to_string(), "Sync".to_string()]);
    }
    if ct.lock_field != LockField::Removed {
        ext.insert("Drop".to_string());
        ext.extend(type_idents(&lock_ty));
    }
    let (has_extern, extern_names) = extern_list(ext);
    let member = |m: &super::model::MemberGen| -> Result<Field, TemplateError> {
        Ok(Field {
            field: m.field.clone(),
            ty: ts.scalar(m.ty)?.to_string(),
        })
    };
    let gens = generics(ct);
    Ok(CelltypeCtx {
        has_extern,
        extern_names,
        struct_name: ct.struct_name.clone(),
        has_generics: !gens.is_empty(),
        generics: gens,
        call_ports: ct
            .call_ports
            .iter()
            .map(|p| Field {
                field: p.field.clone(),
                ty: p.generic.clone(),
            })
            .collect(),
        attrs: ct.attrs.iter().map(member).collect::<Result<_, _>>()?,
        vars: ct.vars.iter().map(member).collect::<Result<_, _>>()?,
        has_vars: ct.var_struct.is_some(),
        var_struct: ct.var_struct.clone().unwrap_or_default(),
        sync_struct: ct.sync_struct.clone().unwrap_or_default(),
        has_lock: ct.lock_field != LockField::Removed,
        lock_ty,
        guard_name: ct.guard_name.clone(),
        accessor: ct.accessor.clone(),
        entries: ct
            .entries
            .iter()
            .map(|e| EntryCtx {
                struct_name: e.struct_name.clone(),
            })
            .collect(),
        cells: ct
            .cells
            .iter()
            .map(|c| CellCtx {
                static_name: c.static_name.clone(),
                type_args: if c.type_args.is_empty() {
                    String::new()
                } else {
                    format!("<{}>", c.type_args.join(", "))
                },
                var_static: c.var_static.clone().unwrap_or_default(),
                lock_object: c.lock_object.clone().unwrap_or_default(),
                attrs: c
                    .attr_values
                    .iter()
                    .map(|(f, v, t)| Value {
                        field: f.clone(),
                        value: literal(v, *t),
                    })
                    .collect(),
                vars: c
                    .var_values
                    .iter()
                    .map(|(f, v, t)| Value {
                        field: f.clone(),
                        value: literal(v, *t),
                    })
                    .collect(),
                bindings: c
                    .bindings
                    .iter()
                    .map(|(f, t)| BindingCtx {
                        field: f.clone(),
                        target: t.clone(),
                    })
                    .collect(),
                entries: ct
                    .entries
                    .iter()
                    .zip(&c.entry_instances)
                    .map(|(e, i)| EntryStaticCtx {
                        static_name: i.static_name.clone(),
                        struct_name: e.struct_name.clone(),
                    })
                    .collect(),
            })
            .collect(),
    })
}

/// One file per celltype plus the instances file `gen/system.rs`.
pub fn emit_scaffolding(
    gm: &GenerationModel,
    ts: &TemplateSet,
) -> Result<EmittedFileSet, TemplateError> {
    let mut out = EmittedFileSet::default();
    for ct in &gm.celltypes {
        let text = ts.render(templates::CELLTYPE, &celltype_ctx(ct, ts)?)?;
        out.insert(
            format!("{GEN_DIR}/{}.rs", ct.module),
            FileKind::Scaffolding,
            text,
        );
    }

    let mut ext = BTreeSet::new();
    let mut locks = Vec::new();
    for l in &gm.locks {
        let ty = ts.name(lock_object_key(l.kind))?.to_string();
        ext.extend(type_idents(&ty));
        locks.push(LockCtx {
            name: l.name.clone(),
            ty,
            rtos_id: l.rtos_id.clone().unwrap_or_default(),
        });
    }
    let (has_extern, extern_names) = extern_list(ext);
    let ctx = SystemCtx {
        has_extern,
        extern_names,
        modules: gm.celltypes.iter().map(|c| c.module.clone()).collect(),
        signatures: gm
            .signatures
            .iter()
            .map(|s| {
                Ok(SignatureCtx {
                    trait_name: s.trait_name.clone(),
                    functions: s
                        .functions
                        .iter()
                        .map(|f| function_ctx(f, ts))
                        .collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, TemplateError>>()?,
        has_locks: !locks.is_empty(),
        locks,
    };
    out.insert(
        format!("{GEN_DIR}/{SYSTEM_STEM}.rs"),
        FileKind::Scaffolding,
        ts.render(templates::SYSTEM, &ctx)?,
    );
    Ok(out)
}

/// `gen/system.cfg`: tasks by name, then semaphores, then mutexes.
pub fn emit_rtos_config(
    gm: &GenerationModel,
    ts: &TemplateSet,
) -> Result<EmittedFileSet, TemplateError> {
    let mut ext = BTreeSet::new();
    let tasks: Vec<TaskCtx> = gm
        .tasks
        .iter()
        .map(|t| TaskCtx {
            id: t.id.clone(),
            body: t.body.clone(),
            priority: t.priority,
        })
        .collect();
    if !tasks.is_empty() {
        ext.extend(["TA_ACT", "STACK_SIZE", "NULL"].map(String::from));
        ext.extend(tasks.iter().map(|t| t.body.clone()));
    }
    let mut semaphores = Vec::new();
    let mut mutexes = Vec::new();
    for l in &gm.locks {
        let Some(id) = l.rtos_id.clone() else {
            continue;
        };
        match l.kind {
            LockObjectKind::Semaphore => {
                ext.insert("TA_NULL".to_string());
                semaphores.push(KernelObjCtx { id, ceiling: 0 });
            }
            LockObjectKind::Mutex { ceiling } => {
                ext.insert("TA_CEILING".to_string());
                mutexes.push(KernelObjCtx { id, ceiling });
            }
            LockObjectKind::Dummy => {}
        }
    }
    let (has_extern, extern_names) = extern_list(ext);
    let ctx = ConfigCtx {
        has_extern,
        extern_names,
        tasks,
        semaphores,
        mutexes,
    };
    let mut out = EmittedFileSet::default();
    out.insert(
        format!("{GEN_DIR}/{SYSTEM_STEM}.cfg"),
        FileKind::RtosConfig,
        ts.render(templates::CONFIG, &ctx)?,
    );
    Ok(out)
}

/// One skeleton per (celltype, entry port). Paths in `existing` are left
/// out of the result.
pub fn emit_user_stubs(
    gm: &GenerationModel,
    ts: &TemplateSet,
    existing: &BTreeSet<String>,
) -> Result<EmittedFileSet, TemplateError> {
    let mut out = EmittedFileSet::default();
    let mut stems = Namer::new();
    for ct in &gm.celltypes {
        for e in &ct.entries {
            let path = format!(
                "{USER_DIR}/{}.rs",
                stems.claim(format!("{}_{}", ct.module, snake(&e.cdl_name)))
            );
            if existing.contains(&path) {
                continue;
            }
            let sig = gm
                .signatures
                .iter()
                .find(|s| s.cdl_name == e.signature)
                .expect("entry signature exists");
            let gens = generics(ct);
            let ctx = StubCtx {
                has_extern: false,
                extern_names: String::new(),
                celltype: ct.cdl_name.clone(),
                entry: e.cdl_name.clone(),
                signature_trait: e.signature_trait.clone(),
                entry_struct: e.struct_name.clone(),
                has_generics: !gens.is_empty(),
                generics: gens,
                accessor: ct.accessor.clone(),
                functions: sig
                    .functions
                    .iter()
                    .map(|f| function_ctx(f, ts))
                    .collect::<Result<_, _>>()?,
            };
            out.insert(
                path,
                FileKind::UserStub,
                ts.render(templates::USER_STUB, &ctx)?,
            );
        }
    }
    Ok(out)
}

/// Scaffolding, configuration and stubs in one set.
pub fn emit_all(
    gm: &GenerationModel,
    ts: &TemplateSet,
    existing: &BTreeSet<String>,
) -> Result<EmittedFileSet, TemplateError> {
    let mut out = emit_scaffolding(gm, ts)?;
    out.merge(emit_rtos_config(gm, ts)?);
    out.merge(emit_user_stubs(gm, ts, existing)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callflow::{parse_callflow, CallFlowSet};
    use crate::codegen::{build_generation_model, line_report, orphan_identifiers};
    use crate::fixtures;
    use crate::model::{build_model, ComponentModel};
    use crate::optimizer::{initial_plan, optimize};
    use crate::parse_cdl;

    fn system(cdl: &str, flow: &str) -> (ComponentModel, CallFlowSet) {
        let m = build_model(&parse_cdl(cdl).unwrap()).unwrap();
        let f = parse_callflow(flow, &m).unwrap();
        (m, f)
    }

    fn pass(cdl: &str, flow: &str, second: bool) -> EmittedFileSet {
        let (m, f) = system(cdl, flow);
        let plan = if second {
            optimize(&m, &f)
        } else {
            initial_plan(&m, Some(&f))
        };
        let gm = build_generation_model(&m, &plan, Some(&f));
        emit_all(&gm, &TemplateSet::builtin(), &BTreeSet::new()).unwrap()
    }

    #[test]
    fn sensor_stub_has_two_skeletons() {
        let out = pass(fixtures::DEMO_CDL, fixtures::DEMO_FLOW, true);
        let stub = out.get("src_user/t_sensor_e_sensor.rs").unwrap();
        assert_eq!(stub.matches("get_cell_ref()").count(), 2);
        assert!(stub.contains("fn set_device_ref(&'static self) {"));
        assert!(stub.contains("fn get_distance(&'static self) -> i32 {"));
        assert_eq!(stub.matches("todo!()").count(), 1);
    }

    #[test]
    fn output_is_deterministic() {
        for second in [false, true] {
            assert_eq!(
                pass(fixtures::DEMO_CDL, fixtures::DEMO_FLOW, second),
                pass(fixtures::DEMO_CDL, fixtures::DEMO_FLOW, second)
            );
        }
    }

    #[test]
    fn three_tasks_get_one_ceiling_mutex() {
        let out = pass(fixtures::DEMO_CDL, fixtures::DEMO3_FLOW, true);
        let cfg = out.get("gen/system.cfg").unwrap();
        let mtx: Vec<_> = cfg.lines().filter(|l| l.starts_with("CRE_MTX")).collect();
        assert_eq!(mtx, vec!["CRE_MTX(MTX_SENSOR1, { TA_CEILING, 1 });"]);
        assert!(!cfg.contains("CRE_SEM"));
        assert_eq!(cfg.lines().filter(|l| l.starts_with("CRE_TSK")).count(), 3);
    }

    #[test]
    fn config_matches_lock_objects() {
        for (cdl, flow) in [
            (fixtures::DEMO_CDL, fixtures::DEMO_FLOW),
            (fixtures::DEMO_CDL, fixtures::DEMO3_FLOW),
            (fixtures::CHAIN_CDL, fixtures::CHAIN_FLOW),
        ] {
            for second in [false, true] {
                let (m, f) = system(cdl, flow);
                let plan = if second {
                    optimize(&m, &f)
                } else {
                    initial_plan(&m, Some(&f))
                };
                let gm = build_generation_model(&m, &plan, Some(&f));
                let out = emit_all(&gm, &TemplateSet::builtin(), &BTreeSet::new()).unwrap();
                let cfg = out.get("gen/system.cfg").unwrap();
                let declared: BTreeSet<&str> = cfg
                    .lines()
                    .filter(|l| l.starts_with("CRE_SEM") || l.starts_with("CRE_MTX"))
                    .map(|l| &l[8..l.find(',').unwrap()])
                    .collect();
                let wanted: BTreeSet<&str> = gm
                    .locks
                    .iter()
                    .filter_map(|l| l.rtos_id.as_deref())
                    .collect();
                assert_eq!(declared, wanted);
                assert_eq!(declared.len(), plan.locked_cells().count());
            }
        }
    }

    #[test]
    fn no_orphans_in_fixture_outputs() {
        for (cdl, flow) in [
            (fixtures::DEMO_CDL, fixtures::DEMO_FLOW),
            (fixtures::DEMO_CDL, fixtures::DEMO3_FLOW),
            (fixtures::CHAIN_CDL, fixtures::CHAIN_FLOW),
        ] {
            for second in [false, true] {
                let out = pass(cdl, flow, second);
                assert_eq!(orphan_identifiers(&out), vec![]);
            }
        }
    }

    #[test]
    fn mixed_celltype_emits_dynamic_field_and_dummy() {
        let cdl = "signature s { void f(void); };\n\
                   celltype t { entry s e; var { float32 v = 1; }; };\n\
                   cell t A { }; cell t B { };";
        let out = pass(
            cdl,
            "task X priority 1 { A.e.f; B.e.f; }\ntask Y priority 2 { A.e.f; }",
            true,
        );
        let ct = out.get("gen/t.rs").unwrap();
        assert!(ct.contains("pub ex_ctrl_ref: &'static (dyn LockManager + Sync),"));
        assert!(ct.contains("v: 1.0,"));
        let sys = out.get("gen/system.rs").unwrap();
        assert!(
            sys.contains("pub static B_EX_CTRL: TECSDummyExCtrlRef = TECSDummyExCtrlRef::new();")
        );
        assert_eq!(orphan_identifiers(&out), vec![]);
    }

    #[test]
    fn optimized_pass_generates_fewer_lines() {
        let p1 = pass(fixtures::DEMO_CDL, fixtures::DEMO_FLOW, false);
        let p2 = pass(fixtures::DEMO_CDL, fixtures::DEMO_FLOW, true);
        let r = line_report(fixtures::DEMO_CDL, &p1, Some(&p2));
        let p2c = r.pass2.unwrap();
        assert!(p2c.auto_generated < r.pass1.auto_generated, "{r}");
        assert_eq!(p2c.user_written, r.pass1.user_written);
        assert_eq!(r.user_lines_changed, Some(0));
    }

    #[test]
    fn existing_stubs_are_left_alone() {
        let (m, f) = system(fixtures::DEMO_CDL, fixtures::DEMO_FLOW);
        let gm = build_generation_model(&m, &optimize(&m, &f), Some(&f));
        let existing: BTreeSet<String> = ["src_user/t_sensor_e_sensor.rs".to_string()].into();
        let stubs = emit_user_stubs(&gm, &TemplateSet::builtin(), &existing).unwrap();
        assert_eq!(stubs.files.len(), 3);

        let dir = tempfile::tempdir().unwrap();
        let user = dir.path().join("src_user/t_sensor_e_sensor.rs");
        std::fs::create_dir_all(user.parent().unwrap()).unwrap();
        std::fs::write(&user, "mine\n").unwrap();
        let all = emit_all(&gm, &TemplateSet::builtin(), &BTreeSet::new()).unwrap();
        let summary = all.write_to(dir.path()).unwrap();
        assert_eq!(summary.kept, vec!["src_user/t_sensor_e_sensor.rs"]);
        assert_eq!(std::fs::read_to_string(&user).unwrap(), "mine\n");
        assert!(dir.path().join("gen/system.cfg").is_file());
    }

    #[test]
    fn no_vars_means_no_lock_plumbing() {
        let cdl = "signature s { int32 f(out int32 x); };\n\
                   celltype t { entry s e; attr { bool on = true; }; };\n\
                   cell t A { };";
        let out = pass(
            cdl,
            "task X priority 1 { A.e.f; }\ntask Y priority 2 { A.e.f; }",
            false,
        );
        let ct = out.get("gen/t.rs").unwrap();
        assert!(!ct.contains("ex_ctrl_ref") && !ct.contains("UnsafeCell"));
        assert!(out
            .get("gen/system.rs")
            .unwrap()
            .contains("fn f(&'static self, x: &mut i32) -> i32;"));
        assert!(!out.get("gen/system.cfg").unwrap().contains("CRE_SEM"));
    }
}
