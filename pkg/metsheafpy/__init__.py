from metsheafpy.logic import parse_condition, parse_formula, format_condition
from metsheafpy.sheaf import MetricSheaf, Resolution, Section, Status, Verdict
from metsheafpy.forcing import force_point, force_local, neighborhood_witness, max_principle_witness
from metsheafpy.generic import build_generic_model, gmt_crosscheck, pseudometric_rho
from metsheafpy.torus import torus_sheaf
from metsheafpy.projective import build_lattice_sheaf, build_parametric_sheaf, fubini_study
from metsheafpy.wavepacket import build_packet_sheaf, propagator, exact_propagator
from metsheafpy.quadrature import quadrature_oracle
from metsheafpy import logic, sheaf, forcing, generic, topology, torus, projective
from metsheafpy import wavepacket, quadrature, scenario, report, utilis
