"""Result files: fault profiles and reports as CSV, displacement and fault fields as legacy VTK."""

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import meshio
import numpy as np

from faultcontact.core.elements import ElementKind
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.system_models import ContactState, FaceContactState
from faultcontact.core.utils import write_csv
from faultcontact.models.report_models import FaultProfileRecord, SolveReport, StepReport

logger = logging.getLogger(__name__)

VTK_CELL_TYPES = {ElementKind.HEX8: "hexahedron", ElementKind.TET4: "tetra", ElementKind.WEDGE6: "wedge"}
# VTK wedges list the top triangle first with the opposite winding
VTK_WEDGE_ORDER = [0, 2, 1, 3, 5, 4]


def fault_profile(mesh: Mesh, state: FaceContactState, xi: Optional[np.ndarray] = None) -> List[FaultProfileRecord]:
    """One record per fault face; ``xi`` is an optional arclength coordinate, defaulting to 0."""
    centroids = mesh.face_centroids()
    xi = np.zeros(len(centroids)) if xi is None else np.asarray(xi, dtype=float)
    labels = ContactState.labels(state.state)
    return [
        FaultProfileRecord(
            face=f,
            x=centroids[f, 0],
            y=centroids[f, 1],
            z=centroids[f, 2],
            xi=xi[f],
            t_N=state.traction[f, 0],
            t_1=state.traction[f, 1],
            t_2=state.traction[f, 2],
            g_N=state.g_N[f],
            dg_T1=state.dg_T[f, 0],
            dg_T2=state.dg_T[f, 1],
            state=labels[f],
        )
        for f in range(len(state))
    ]


def write_records(path, records: Sequence, columns: Sequence[str]) -> Path:
    """CSV of pydantic records exposing ``row()`` in ``columns`` order."""
    path = write_csv(path, columns, (r.row() for r in records))
    logger.info("wrote %d row(s) to %s", len(records), path)
    return path


def write_profile_csv(path, records: Iterable[FaultProfileRecord]) -> Path:
    return write_records(path, list(records), FaultProfileRecord.COLUMNS)


REPORT_COLUMNS = ("step", "label", "uzawa", "newton", "krylov", "residual", "converged", "stick", "slip", "open")


def _report_row(step: StepReport):
    counts = [step.states.get(s.label, 0) for s in ContactState]
    return [step.step, step.label, step.uzawa, step.newton, step.krylov, step.residual, step.converged, *counts]


def write_report_csv(path, report: SolveReport) -> Path:
    return write_csv(path, REPORT_COLUMNS, (_report_row(s) for s in report.steps))


def _atomic_meshio(path: Path, mesh: meshio.Mesh) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.stem}.", suffix=".vtk", dir=path.parent)
    os.close(fd)
    try:
        meshio.write(tmp, mesh, file_format="vtk", binary=False)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def bulk_vtk_mesh(mesh: Mesh, u: np.ndarray) -> meshio.Mesh:
    cells, regions = [], []
    for kind, ids, conn in mesh.iter_kind_groups():
        if kind is ElementKind.WEDGE6:
            conn = conn[:, VTK_WEDGE_ORDER]
        cells.append((VTK_CELL_TYPES[kind], conn))
        regions.append(mesh.cell_region[ids].astype(np.int64))
    return meshio.Mesh(
        points=np.asarray(mesh.nodes),
        cells=cells,
        point_data={"displacement": np.asarray(u, dtype=float).reshape(-1, 3)},
        cell_data={"region": regions},
    )


def fault_vtk_mesh(mesh: Mesh, state: FaceContactState) -> meshio.Mesh:
    faults = mesh.faults
    nv = faults.n_vertices
    blocks, fields = [], {"traction": [], "g_N": [], "dg_T": [], "state": []}
    for count, name in ((4, "quad"), (3, "triangle")):
        ids = np.flatnonzero(nv == count)
        if not len(ids):
            continue
        blocks.append((name, faults.minus_nodes[ids, :count]))
        fields["traction"].append(state.traction[ids])
        fields["g_N"].append(state.g_N[ids])
        fields["dg_T"].append(np.column_stack([state.dg_T[ids], np.zeros(len(ids))]))
        fields["state"].append(state.state[ids].astype(np.int64))
    return meshio.Mesh(points=np.asarray(mesh.nodes), cells=blocks, cell_data=fields if blocks else {})


def write_fields(path, mesh: Mesh, u: np.ndarray, state: FaceContactState) -> List[Path]:
    """ASCII legacy VTK of the displacement field, plus ``<stem>_fault.vtk`` with per-face results."""
    path = Path(path)
    written = [_atomic_meshio(path, bulk_vtk_mesh(mesh, u))]
    if mesh.n_faces:
        written.append(_atomic_meshio(path.with_name(f"{path.stem}_fault.vtk"), fault_vtk_mesh(mesh, state)))
    logger.info("wrote field output %s", ", ".join(str(p) for p in written))
    return written
