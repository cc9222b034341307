import os
import csv
import json

CSV_SCHEMAS = {
    "sweep": ["alpha", "q", "gd_nats", "gd_bits"],
    "sweep_minima": ["alpha", "q_star", "gd_min_nats", "gd_min_bits"],
    "binary_counts": ["seed", "t", "count"],
    "sphere_estimates": ["seed", "f_hat", "stderr", "truncated"],
    "feasibility": ["alpha", "trials", "found", "rate"],
}


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def format_float(value):
    """Shortest round-trip repr, so equal floats always print identically."""
    return repr(float(value))


def write_csv(path, schema, rows, manifest_name=None, version=1):
    """
    Write `rows` (sequences matching CSV_SCHEMAS[schema]) as UTF-8 CSV with '\\n' endings.

    The first line is a comment `# schema=<name>/v<k> manifest=<file>`; the header
    follows. Floats are written with repr.
    """
    header = CSV_SCHEMAS[schema]
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# schema={schema}/v{version} manifest={manifest_name or '-'}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{schema} row has {len(row)} fields, expected {len(header)}")
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return path


def read_csv(path):
    """Return (schema comment, header, rows as lists of strings)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        comment = f.readline().rstrip("\n")
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader]
    return comment, header, rows


def write_json(path, payload):
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=4, ensure_ascii=False, sort_keys=True)
        f.write("\n")
    return path


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
