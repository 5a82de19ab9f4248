"""Volume reduction of braided surface-code circuits through ZX-diagrams.

Circuits are parsed, translated to ZX-diagrams, reduced by local rewrites,
read back as braided defect structures and packed into a 3D box. A tensor
oracle and a Pauli-propagation check guard the reduction.
"""
from .circuit import Circuit, Gate, GateKind, circuit_to_zx, emit_circuit, load_circuit, parse_circuit
from .zx import Color, EdgeTag, ZXDiagram
from .rewrite import ReductionPolicy, Rule, reduce
from .braid import BraidStructure, zx_to_braid
from .layout import Layout3D, LayoutOptions, VolumeReport, direct_translate, volume
from .pipeline import PipelineConfig, run_benchmarks, run_pipeline

__all__ = [
    "Circuit", "Gate", "GateKind", "circuit_to_zx", "emit_circuit", "load_circuit", "parse_circuit",
    "Color", "EdgeTag", "ZXDiagram", "ReductionPolicy", "Rule", "reduce", "BraidStructure", "zx_to_braid",
    "Layout3D", "LayoutOptions", "VolumeReport", "direct_translate", "volume",
    "PipelineConfig", "run_benchmarks", "run_pipeline",
]
__version__ = "1.0.0"
