//! The `LMU1` container file format.
//!
//! Layout: a fixed header (magic `LMU1`, format version), a section table
//! (name, offset, length, CRC-32C), then the section payloads. Per part the
//! sections are a JSON schema text, a binary auxiliary blob, and the model
//! blob holding every tree with little-endian `f32` weights. Training
//! quantizes weights to `f32` before a model is accepted, so a save / load /
//! re-save cycle is byte-identical and queries agree exactly.

use crate::encode::{interval_partition, DnnTree, DnnTreeNode, Interval, NodeModel};
use crate::error::Error;
use crate::nn::{Activation, Layer, Mlp, MlpConfig, TrainConfig};
use crate::store::{AttrBundle, AuxInfo, Lmu, LmuConfig, LmuPart, StorageMode};
use crate::table::{AttrDef, Group, GroupIndex, Schema, Value};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

const MAGIC: [u8; 4] = *b"LMU1";
const VERSION: u16 = 1;

/// CRC-32C (Castagnoli), reflected polynomial 0x82F63B78.
pub fn crc32c(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0x82F6_3B78 & mask);
        }
    }
    !crc
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    attrs: Vec<AttrDoc>,
}

#[derive(Serialize, Deserialize)]
struct AttrDoc {
    name: String,
    // i128 bounds as decimal strings, to stay portable across JSON readers.
    lo: String,
    hi: String,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Self { buf: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i128(&mut self, v: i128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    section: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], section: &'static str) -> Self {
        Self { buf, pos: 0, section }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::BadFile(format!("truncated {} section", self.section)));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i128(&mut self) -> Result<i128> {
        Ok(i128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len_u32(&mut self, what: &str) -> Result<usize> {
        let n = self.u32()? as usize;
        // Every counted element takes at least one byte; reject counts the
        // remaining bytes cannot possibly hold.
        if n > self.buf.len() - self.pos {
            return Err(Error::BadFile(format!(
                "implausible {what} count in {} section",
                self.section
            )));
        }
        Ok(n)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::BadFile(format!(
                "trailing bytes in {} section",
                self.section
            )));
        }
        Ok(())
    }
}

fn write_mlp(w: &mut Writer, mlp: &Mlp) {
    let c = &mlp.config;
    w.u32(c.input_dim as u32);
    w.u32(c.hidden_width as u32);
    w.u32(c.hidden_layers as u32);
    w.u32(c.output_classes as u32);
    w.u8(match c.activation {
        Activation::Relu => 0,
    });
    w.u64(c.seed);
    for layer in &mlp.layers {
        for &v in &layer.weights {
            w.f32(v as f32);
        }
        for &v in &layer.biases {
            w.f32(v as f32);
        }
    }
}

fn read_mlp(r: &mut Reader) -> Result<Mlp> {
    let input_dim = r.u32()? as usize;
    let hidden_width = r.u32()? as usize;
    let hidden_layers = r.u32()? as usize;
    let output_classes = r.u32()? as usize;
    let activation = match r.u8()? {
        0 => Activation::Relu,
        t => return Err(Error::BadFile(format!("unknown activation tag {t}"))),
    };
    let seed = r.u64()?;
    let config = MlpConfig {
        input_dim,
        hidden_width,
        hidden_layers,
        output_classes,
        activation,
        seed,
    };
    config.validate()?;
    let mut layers = Vec::with_capacity(hidden_layers + 1);
    let mut in_dim = input_dim;
    for li in 0..=hidden_layers {
        let out_dim = if li == hidden_layers {
            output_classes
        } else {
            hidden_width
        };
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..in_dim * out_dim {
            weights.push(r.f32()? as f64);
        }
        let mut biases = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            biases.push(r.f32()? as f64);
        }
        layers.push(Layer {
            in_dim,
            out_dim,
            weights,
            biases,
        });
        in_dim = out_dim;
    }
    Ok(Mlp { config, layers })
}

fn write_model(w: &mut Writer, model: &NodeModel) {
    match model {
        NodeModel::Constant(c) => {
            w.u8(1);
            w.u32(*c as u32);
        }
        NodeModel::Net(mlp) => {
            w.u8(2);
            write_mlp(w, mlp);
        }
        NodeModel::Split { bit, zero, one } => {
            w.u8(3);
            w.u32(*bit);
            write_model(w, zero);
            write_model(w, one);
        }
    }
}

fn read_model(r: &mut Reader) -> Result<NodeModel> {
    match r.u8()? {
        1 => Ok(NodeModel::Constant(r.u32()? as usize)),
        2 => Ok(NodeModel::Net(read_mlp(r)?)),
        3 => {
            let bit = r.u32()?;
            let zero = Box::new(read_model(r)?);
            let one = Box::new(read_model(r)?);
            Ok(NodeModel::Split { bit, zero, one })
        }
        t => Err(Error::BadFile(format!("unknown model tag {t}"))),
    }
}

fn write_node(w: &mut Writer, node: &DnnTreeNode) {
    w.i128(node.interval.lo);
    w.i128(node.interval.hi);
    match &node.model {
        None => w.u8(0),
        Some(m) => write_model(w, m),
    }
    w.u32(node.children.len() as u32);
    for child in &node.children {
        match child {
            None => w.u8(0),
            Some(c) => {
                w.u8(1);
                write_node(w, c);
            }
        }
    }
}

fn read_node(r: &mut Reader, fanout: usize) -> Result<DnnTreeNode> {
    let lo = r.i128()?;
    let hi = r.i128()?;
    let interval = Interval::new(lo, hi)?;
    let model = {
        let save = r.pos;
        if r.u8()? == 0 {
            None
        } else {
            r.pos = save;
            Some(read_model(r)?)
        }
    };
    let n_children = r.len_u32("child")?;
    // The child partition is a function of the interval and fanout; rebuild
    // it and check the stored arity against it.
    let children_intervals = if interval.width() == 1 {
        Vec::new()
    } else {
        interval_partition(interval, fanout)?
    };
    if n_children != children_intervals.len() {
        return Err(Error::BadFile(format!(
            "node arity {n_children} does not match its interval partition"
        )));
    }
    let mut children = Vec::with_capacity(n_children);
    for i in 0..n_children {
        match r.u8()? {
            0 => children.push(None),
            1 => {
                let child = read_node(r, fanout)?;
                if child.interval != children_intervals[i] {
                    return Err(Error::BadFile("child interval mismatch".into()));
                }
                children.push(Some(Box::new(child)));
            }
            t => return Err(Error::BadFile(format!("unknown child tag {t}"))),
        }
    }
    Ok(DnnTreeNode {
        interval,
        children_intervals,
        model,
        children,
    })
}

fn write_tree(w: &mut Writer, tree: &DnnTree) {
    w.u32(tree.fanout as u32);
    w.u32(tree.input_dim as u32);
    write_node(w, &tree.root);
}

fn read_tree(r: &mut Reader) -> Result<DnnTree> {
    let fanout = r.u32()? as usize;
    let input_dim = r.u32()? as usize;
    if fanout < 2 || input_dim < 1 {
        return Err(Error::BadFile("invalid tree header".into()));
    }
    let root = read_node(r, fanout)?;
    Ok(DnnTree {
        root,
        fanout,
        input_dim,
    })
}

fn write_config(w: &mut Writer, cfg: &LmuConfig) {
    w.u32(cfg.fanout as u32);
    w.u32(cfg.input_dim as u32);
    w.u32(cfg.hidden_width as u32);
    w.u32(cfg.hidden_layers as u32);
    w.u32(cfg.max_width as u32);
    w.u64(cfg.seed);
    w.u32(cfg.train.max_epochs as u32);
    w.f64(cfg.train.learning_rate);
    w.u32(cfg.train.batch_size as u32);
    w.f64(cfg.train.target_accuracy);
    w.u64(cfg.train.rng_seed);
    w.f64(cfg.compact_threshold);
}

fn read_config(r: &mut Reader) -> Result<LmuConfig> {
    Ok(LmuConfig {
        fanout: r.u32()? as usize,
        input_dim: r.u32()? as usize,
        hidden_width: r.u32()? as usize,
        hidden_layers: r.u32()? as usize,
        max_width: r.u32()? as usize,
        seed: r.u64()?,
        train: TrainConfig {
            max_epochs: r.u32()? as usize,
            learning_rate: r.f64()?,
            batch_size: r.u32()? as usize,
            target_accuracy: r.f64()?,
            rng_seed: r.u64()?,
        },
        compact_threshold: r.f64()?,
    })
}

fn schema_section(schema: &Schema) -> Vec<u8> {
    let doc = SchemaDoc {
        attrs: schema
            .attrs
            .iter()
            .map(|a| AttrDoc {
                name: a.name.clone(),
                lo: a.domain.lo.to_string(),
                hi: a.domain.hi.to_string(),
            })
            .collect(),
    };
    serde_json::to_vec(&doc).expect("schema serializes")
}

fn parse_schema(bytes: &[u8]) -> Result<Schema> {
    let doc: SchemaDoc = serde_json::from_slice(bytes)
        .map_err(|e| Error::BadFile(format!("schema section: {e}")))?;
    let mut attrs = Vec::with_capacity(doc.attrs.len());
    for a in doc.attrs {
        let lo: i128 = a
            .lo
            .parse()
            .map_err(|_| Error::BadFile(format!("bad interval bound {:?}", a.lo)))?;
        let hi: i128 = a
            .hi
            .parse()
            .map_err(|_| Error::BadFile(format!("bad interval bound {:?}", a.hi)))?;
        attrs.push(AttrDef {
            name: a.name,
            domain: Interval::new(lo, hi)?,
        });
    }
    Schema::new(attrs)
}

fn aux_section(part: &LmuPart) -> Vec<u8> {
    let mut w = Writer::new();
    w.i128(part.id_domain.lo);
    w.i128(part.id_domain.hi);
    write_config(&mut w, &part.config);
    w.u64(part.aux.id_range.0);
    w.u64(part.aux.id_range.1);
    w.u64(part.aux.live_ids.len() as u64);
    for &id in &part.aux.live_ids {
        w.u64(id);
    }
    for bt in &part.aux.bt {
        w.u32(bt.len() as u32);
        for &(v, c) in bt {
            w.i64(v);
            w.u32(c);
        }
    }
    let dup: BTreeMap<u64, &Vec<u64>> = part.aux.dup.iter().map(|(k, v)| (*k, v)).collect();
    w.u32(dup.len() as u32);
    for (key, ids) in dup {
        w.u64(key);
        w.u32(ids.len() as u32);
        for &id in ids {
            w.u64(id);
        }
    }
    for bundle in &part.bundles {
        w.u32(bundle.group.groups.len() as u32);
        for g in &bundle.group.groups {
            w.i64(g.value);
            w.u32(g.slots.len() as u32);
            for slot in &g.slots {
                match slot {
                    None => w.u8(0),
                    Some(id) => {
                        w.u8(1);
                        w.u64(*id);
                    }
                }
            }
        }
    }
    w.buf
}

struct AuxDecoded {
    id_domain: Interval,
    config: LmuConfig,
    aux: AuxInfo,
    groups: Vec<GroupIndex>,
}

fn parse_aux(bytes: &[u8], d: usize) -> Result<AuxDecoded> {
    let mut r = Reader::new(bytes, "aux");
    let id_domain = Interval::new(r.i128()?, r.i128()?)?;
    let config = read_config(&mut r)?;
    let id_range = (r.u64()?, r.u64()?);
    let n_live = r.u64()? as usize;
    let mut live_ids = BTreeSet::new();
    for _ in 0..n_live {
        live_ids.insert(r.u64()?);
    }
    let mut bt = Vec::with_capacity(d);
    let mut hf = Vec::with_capacity(d);
    for _ in 0..d {
        let n = r.len_u32("aggregate")?;
        let mut col = Vec::with_capacity(n);
        for _ in 0..n {
            col.push((r.i64()?, r.u32()?));
        }
        hf.push(col.iter().copied().collect::<HashMap<Value, u32>>());
        bt.push(col);
    }
    let n_dup = r.len_u32("duplicate")?;
    let mut dup = HashMap::with_capacity(n_dup);
    for _ in 0..n_dup {
        let key = r.u64()?;
        let n = r.len_u32("duplicate id")?;
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            ids.push(r.u64()?);
        }
        dup.insert(key, ids);
    }
    let mut groups = Vec::with_capacity(d);
    for attr in 0..d {
        let n_groups = r.len_u32("group")?;
        let mut gs = Vec::with_capacity(n_groups);
        let mut by_id = HashMap::new();
        for _ in 0..n_groups {
            let value = r.i64()?;
            let n_slots = r.len_u32("slot")?;
            let mut slots = Vec::with_capacity(n_slots);
            for si in 0..n_slots {
                match r.u8()? {
                    0 => slots.push(None),
                    1 => {
                        let id = r.u64()?;
                        by_id.insert(id, (value, si));
                        slots.push(Some(id));
                    }
                    t => return Err(Error::BadFile(format!("unknown slot tag {t}"))),
                }
            }
            gs.push(Group { value, slots });
        }
        groups.push(GroupIndex {
            attr,
            groups: gs,
            by_id,
        });
    }
    r.finish()?;
    Ok(AuxDecoded {
        id_domain,
        config,
        aux: AuxInfo {
            id_range,
            live_ids,
            hf,
            bt,
            dup,
        },
        groups,
    })
}

fn models_section(part: &LmuPart) -> Vec<u8> {
    let mut w = Writer::new();
    for tree in &part.forward {
        write_tree(&mut w, tree);
    }
    write_tree(&mut w, &part.inverse);
    for bundle in &part.bundles {
        write_tree(&mut w, &bundle.id_tree);
        for tree in &bundle.attr_trees {
            write_tree(&mut w, tree);
        }
    }
    w.buf
}

fn parse_models(
    bytes: &[u8],
    d: usize,
    decoded: AuxDecoded,
    schema: Schema,
) -> Result<LmuPart> {
    let mut r = Reader::new(bytes, "models");
    let mut forward = Vec::with_capacity(d);
    for _ in 0..d {
        forward.push(read_tree(&mut r)?);
    }
    let inverse = read_tree(&mut r)?;
    let mut bundles = Vec::with_capacity(d);
    for group in decoded.groups {
        let id_tree = read_tree(&mut r)?;
        let mut attr_trees = Vec::with_capacity(d - 1);
        for _ in 0..d - 1 {
            attr_trees.push(read_tree(&mut r)?);
        }
        bundles.push(AttrBundle {
            group,
            id_tree,
            attr_trees,
        });
    }
    r.finish()?;
    Ok(LmuPart {
        schema,
        aux: decoded.aux,
        forward,
        inverse,
        bundles,
        id_domain: decoded.id_domain,
        config: decoded.config,
    })
}

/// Serializes a unit to the `LMU1` byte format.
pub fn to_bytes(lmu: &Lmu) -> Result<Vec<u8>> {
    let mut sections: Vec<(String, Vec<u8>)> = Vec::new();
    let mut meta = Writer::new();
    meta.u8(match lmu.mode {
        StorageMode::Plain => 0,
        StorageMode::Encrypted => 1,
    });
    meta.u32(lmu.parts.len() as u32);
    sections.push(("meta".into(), meta.buf));
    for (i, part) in lmu.parts.iter().enumerate() {
        sections.push((format!("schema/{i}"), schema_section(&part.schema)));
        sections.push((format!("aux/{i}"), aux_section(part)));
        sections.push((format!("models/{i}"), models_section(part)));
    }

    let mut header = Writer::new();
    header.buf.extend_from_slice(&MAGIC);
    header.u16(VERSION);
    header.u32(sections.len() as u32);
    let table_len: usize = sections
        .iter()
        .map(|(name, _)| 4 + name.len() + 8 + 8 + 4)
        .sum();
    let mut offset = header.buf.len() + table_len;
    for (name, body) in &sections {
        header.u32(name.len() as u32);
        header.buf.extend_from_slice(name.as_bytes());
        header.u64(offset as u64);
        header.u64(body.len() as u64);
        header.u32(crc32c(body));
        offset += body.len();
    }
    let mut out = header.buf;
    for (_, body) in sections {
        out.extend_from_slice(&body);
    }
    Ok(out)
}

/// Parses the `LMU1` byte format; every section checksum is verified before
/// its payload is touched.
pub fn from_bytes(bytes: &[u8]) -> Result<Lmu> {
    let mut r = Reader::new(bytes, "header");
    if r.take(4)? != MAGIC {
        return Err(Error::BadFile("bad magic, not an LMU1 file".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::BadFile(format!("unsupported format version {version}")));
    }
    let n_sections = r.len_u32("section")?;
    let mut sections: Vec<(String, &[u8])> = Vec::with_capacity(n_sections);
    for _ in 0..n_sections {
        let name_len = r.len_u32("section name byte")?;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::BadFile("section name is not UTF-8".into()))?;
        let offset = r.u64()? as usize;
        let len = r.u64()? as usize;
        let crc = r.u32()?;
        let body = bytes
            .get(offset..offset.checked_add(len).ok_or_else(|| {
                Error::BadFile(format!("section {name} length overflow"))
            })?)
            .ok_or_else(|| Error::BadFile(format!("section {name} out of bounds")))?;
        if crc32c(body) != crc {
            return Err(Error::ChecksumMismatch(name));
        }
        sections.push((name, body));
    }
    let find = |name: &str| -> Result<&[u8]> {
        sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, b)| b)
            .ok_or_else(|| Error::BadFile(format!("missing section {name}")))
    };

    let mut meta = Reader::new(find("meta")?, "meta");
    let mode = match meta.u8()? {
        0 => StorageMode::Plain,
        1 => StorageMode::Encrypted,
        t => return Err(Error::BadFile(format!("unknown storage mode {t}"))),
    };
    let n_parts = meta.u32()? as usize;
    meta.finish()?;
    if n_parts == 0 {
        return Err(Error::BadFile("unit has no parts".into()));
    }

    let mut parts = Vec::with_capacity(n_parts);
    for i in 0..n_parts {
        let schema = parse_schema(find(&format!("schema/{i}"))?)?;
        let d = schema.arity();
        let decoded = parse_aux(find(&format!("aux/{i}"))?, d)?;
        parts.push(parse_models(
            find(&format!("models/{i}"))?,
            d,
            decoded,
            schema,
        )?);
    }
    Ok(Lmu { mode, parts })
}

pub fn save(lmu: &Lmu, path: &Path) -> Result<()> {
    let bytes = to_bytes(lmu)?;
    // Write, sync, then rename so a crash never leaves a half-written unit
    // behind.
    let tmp = path.with_extension("tmp");
    {
        use std::io::Write;
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Lmu> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{build_lmu, LmuConfig};
    use crate::table::{uniform_schema, Table, Tuple};

    fn sample_lmu(seed: u64) -> Lmu {
        let domain = Interval::new(1, 101).unwrap();
        let schema = uniform_schema(2, domain);
        let mut rng = crate::rng::SplitMix64::new(seed);
        let tuples = (1..=40u64)
            .map(|id| Tuple {
                id,
                values: (0..2).map(|_| 1 + rng.next_below(100) as i64).collect(),
            })
            .collect();
        let table = Table::new(schema, tuples).unwrap();
        build_lmu(&table, &LmuConfig::light(seed)).unwrap()
    }

    #[test]
    fn crc32c_vectors() {
        // Published check values for CRC-32C.
        assert_eq!(crc32c(b"123456789"), 0xE306_9283);
        assert_eq!(crc32c(b""), 0);
        assert_eq!(crc32c(&[0u8; 32]), 0x8A91_36AA);
    }

    #[test]
    fn round_trip_preserves_unit() {
        let lmu = sample_lmu(3);
        let bytes = to_bytes(&lmu).unwrap();
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back, lmu);
        assert_eq!(back.seq_scan(), lmu.seq_scan());
    }

    #[test]
    fn resave_is_byte_identical() {
        let lmu = sample_lmu(5);
        let bytes = to_bytes(&lmu).unwrap();
        let again = to_bytes(&from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("unit.lmu");
        let lmu = sample_lmu(7);
        save(&lmu, &path).unwrap();
        assert_eq!(load(&path).unwrap(), lmu);
    }

    #[test]
    fn corruption_is_detected_by_section() {
        let lmu = sample_lmu(9);
        let mut bytes = to_bytes(&lmu).unwrap();
        let n = bytes.len();
        bytes[n - 10] ^= 0xFF; // inside the last (models) payload
        match from_bytes(&bytes) {
            Err(Error::ChecksumMismatch(name)) => assert!(name.starts_with("models/")),
            other => panic!("expected checksum mismatch, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let lmu = sample_lmu(11);
        let mut bytes = to_bytes(&lmu).unwrap();
        bytes[0] = b'X';
        assert!(matches!(from_bytes(&bytes), Err(Error::BadFile(_))));
    }

    #[test]
    fn truncated_file_rejected() {
        let lmu = sample_lmu(13);
        let bytes = to_bytes(&lmu).unwrap();
        assert!(from_bytes(&bytes[..bytes.len() / 2]).is_err());
        assert!(from_bytes(&[]).is_err());
    }
}
