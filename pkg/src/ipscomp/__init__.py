"""Compile algebraic circuits to CNFs with IPS refutations, and check them.

The modules follow the pipeline: ``field`` and ``circuit`` define the data,
``pit`` tests identities, ``ips`` holds certificates and their verifier,
``gateenc`` turns a circuit into equations, ``vectorize`` lowers extension
fields to the prime field, ``bitblast`` and ``boolean`` move to bits and
clauses, and ``pipeline`` ties everything into certificate bundles.
"""
from .circuit import AlgCircuit, Builder, depth, evaluate, parse_netlist, proddepth, sdeg, to_netlist, wires
from .errors import IpsError
from .field import Q, FieldDesc, FieldMap, make_field, parse_field, select_field
from .gateenc import encode, refute_variety
from .ips import IPSCert, VerifyReport, verify
from .pipeline import build_refutation, certify, compile_cnf, parse_bundle, variety_bundle, verify_bundle
from .pit import PitVerdict, pit, pit_exact, pit_randomized

__version__ = "0.1.0"

__all__ = [
    "AlgCircuit", "Builder", "FieldDesc", "FieldMap", "IPSCert", "IpsError", "PitVerdict", "Q",
    "VerifyReport", "build_refutation", "certify", "compile_cnf", "depth", "encode", "evaluate",
    "make_field", "parse_bundle", "parse_field", "parse_netlist", "pit", "pit_exact", "pit_randomized",
    "proddepth", "refute_variety", "sdeg", "select_field", "to_netlist", "variety_bundle", "verify",
    "verify_bundle", "wires",
]
