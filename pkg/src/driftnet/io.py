"""Plot-ready artifact writers: CSV tables plus JSON sidecars.

Floats are written with repr (shortest round-trip form) so reruns with the
same seed produce byte-identical files regardless of worker count.
"""

import json
from pathlib import Path


def _fmt(v) -> str:
    return repr(float(v))


def write_beta_csv(path, samples) -> None:
    """Columns (replica, vertex, beta) from a BetaSamples."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write("replica,vertex,beta\n")
        for row, rid in enumerate(samples.replica_ids):
            for i in range(samples.beta.shape[1]):
                fh.write(f"{int(rid)},{i},{_fmt(samples.beta[row, i])}\n")


def write_path_records_csv(path, records, replica_ids=None) -> None:
    """Columns (replica, vertex, t, x, psi); sidecar <path>.t_hit.json."""
    path = Path(path)
    ids = list(range(len(records))) if replica_ids is None else list(replica_ids)
    with path.open("w") as fh:
        fh.write("replica,vertex,t,x,psi\n")
        for rid, rec in zip(ids, records):
            for k in range(len(rec.grid)):
                for i in range(rec.n):
                    fh.write(f"{rid},{i},{_fmt(rec.grid[k])},{_fmt(rec.x[k, i])},"
                             f"{_fmt(rec.psi[k, i])}\n")
    sidecar = {str(rid): [float(v) for v in rec.t_hit] for rid, rec in zip(ids, records)}
    path.with_suffix(path.suffix + ".t_hit.json").write_text(json.dumps(sidecar, sort_keys=True))


def write_vrjp_csv(path, records, replica_ids=None) -> None:
    """Columns (replica, jump, time, vertex); sidecar JSON with ell and N."""
    path = Path(path)
    ids = list(range(len(records))) if replica_ids is None else list(replica_ids)
    with path.open("w") as fh:
        fh.write("replica,jump,time,vertex\n")
        for rid, rec in zip(ids, records):
            for k in range(len(rec.jump_times)):
                fh.write(f"{rid},{k},{_fmt(rec.jump_times[k])},{int(rec.visited[k])}\n")
    summary = {
        str(rid): {
            "local_times": [float(v) for v in rec.local_times],
            "jump_counts": [int(v) for v in rec.jump_counts],
            "t_end": float(rec.t_end),
        }
        for rid, rec in zip(ids, records)
    }
    path.with_suffix(path.suffix + ".summary.json").write_text(json.dumps(summary, sort_keys=True))
