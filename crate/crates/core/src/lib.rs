//! Smart-home context engine: an RDF triple store for ontology-modeled home
//! context, significance filtering of environment readings, a SPARQL subset
//! and priority-ordered appliance reasoning.

pub mod cli;
pub mod dedup;
pub mod ingest;
pub mod ontology;
pub mod rdf;
pub mod sparql;
pub mod tracegen;
