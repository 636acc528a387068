pub mod bundle;
pub mod mask;
pub mod phantom;
