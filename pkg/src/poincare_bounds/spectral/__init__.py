"""Second-order spectrum, enclosures, disk constants and the block-operator oracle."""

from .bessel import DiskConstants, bessel_j, disk_constants, first_zero
from .enclosure import Enclosure, default_b, enclosure_from_point, in_disk, select_ground_point
from .local_modes import local_mode_coefficients, sample_angles
from .oracle import OracleReport, block_operator_oracle
from .qep import SecondOrderSpectrum, ground_shift, solve_qep

__all__ = [
    "DiskConstants", "Enclosure", "OracleReport", "SecondOrderSpectrum", "bessel_j", "block_operator_oracle",
    "default_b", "disk_constants", "enclosure_from_point", "first_zero", "ground_shift", "in_disk",
    "local_mode_coefficients", "sample_angles", "select_ground_point", "solve_qep",
]
