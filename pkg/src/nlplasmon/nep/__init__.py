"""Pole search, classification and modal expansion for nonlinear pencils."""
from .beyn import BeynParams, FunctionPencil, beyn_solve, polish_pole
from .contour import Circle, Ellipse, Rectangle, axis_contour, parse_contour
from .modal import ModalEvaluation, ModeBundle, modal_data, modal_expansion_eval, residue_error
from .poles import Pole, classify_pole, poles_to_tsv, write_poles

__all__ = [
    "BeynParams",
    "FunctionPencil",
    "beyn_solve",
    "polish_pole",
    "Circle",
    "Ellipse",
    "Rectangle",
    "axis_contour",
    "parse_contour",
    "ModalEvaluation",
    "ModeBundle",
    "modal_data",
    "modal_expansion_eval",
    "residue_error",
    "Pole",
    "classify_pole",
    "poles_to_tsv",
    "write_poles",
]
