// SPDX-License-Identifier: Apache-2.0

//! Meshless ALE engine: boundary curves moved by curvature flow, with the
//! interior velocity given by a method-of-fundamental-solutions harmonic
//! extension and monitored by a posteriori error indicators.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolution;
pub mod exec;
pub mod geometry;
pub mod indicators;
pub mod mesh;
pub mod mfs;
pub mod numerics;
pub mod point;

pub use point::Vec2;
