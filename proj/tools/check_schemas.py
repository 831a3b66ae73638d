#!/usr/bin/env python3
"""Validates engine inputs and outputs against the published JSON schemas.

Covers the capture-driver side (fixture and synthetic session files, plus
schema-invalid mutations that the engine must also reject) and the
review-console side (audit report and every review API response).
"""

import argparse
import copy
import json
import pathlib
import re
import signal
import subprocess
import sys
import tempfile
import urllib.error
import urllib.request

import jsonschema


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class Checker:
    def __init__(self, schemas):
        session = load(schemas / "session.schema.json")
        report = load(schemas / "report.schema.json")
        self.session = jsonschema.Draft202012Validator(session)
        self.report_schema = report
        self.failures = 0
        self.checked = 0

    def fragment(self, name):
        schema = dict(self.report_schema)
        schema["$ref"] = "#/$defs/" + name
        return jsonschema.Draft202012Validator(schema)

    def expect_valid(self, validator, doc, label):
        self.checked += 1
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
        if errors:
            self.failures += 1
            err = errors[0]
            path = "/".join(str(p) for p in err.absolute_path)
            print(f"FAIL {label}: {path}: {err.message[:200]}")

    def expect(self, condition, label):
        self.checked += 1
        if not condition:
            self.failures += 1
            print(f"FAIL {label}")


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def session_files(root):
    return sorted(pathlib.Path(root).rglob("*.session.json"))


def mutations(doc):
    """Schema-invalid variants of a valid session."""
    out = []
    m = copy.deepcopy(doc)
    m["surprise"] = 1
    out.append(("unknown top-level key", m))
    m = copy.deepcopy(doc)
    del m["viewport"]
    out.append(("missing viewport", m))
    m = copy.deepcopy(doc)
    m["scenario"] = "teleport"
    out.append(("unknown scenario", m))
    m = copy.deepcopy(doc)
    m["captured_at"] = "2024-03-01 10:00:00"
    out.append(("bad timestamp", m))
    m = copy.deepcopy(doc)
    m["events"][0]["kind"] = "teleport"
    out.append(("unknown event kind", m))
    m = copy.deepcopy(doc)
    for ev in m["events"]:
        if ev["kind"] == "response" and ev["set_cookies"]:
            ev["set_cookies"][0]["source"] = "magic"
            out.append(("bad cookie source", m))
            break
    m = copy.deepcopy(doc)
    m["format_version"] = 2
    out.append(("format version", m))
    return out


def check_sessions(c, cli, fixtures, work):
    for path in session_files(fixtures):
        c.expect_valid(c.session, load(path), f"fixture {path.relative_to(fixtures)}")

    synth_dir = work / "synth"
    res = run(cli, "synth", "--plant", "R1,R2,R11,R14,R15,R20-wall,clean,R1+R2+R11+R14+R15+R20-wall",
              "--out", str(synth_dir))
    c.expect(res.returncode == 0, f"synth exit code {res.returncode}: {res.stderr.strip()}")
    for path in session_files(synth_dir):
        c.expect_valid(c.session, load(path), f"synth {path.relative_to(synth_dir)}")

    base = load(fixtures / "ebay_like" / "no_action.session.json")
    for i, (label, doc) in enumerate(mutations(base)):
        c.expect(not c.session.is_valid(doc), f"schema accepted mutation '{label}'")
        corpus = work / f"mutant{i}"
        (corpus / "site").mkdir(parents=True)
        (corpus / "site" / "no_action.session.json").write_text(json.dumps(doc), encoding="utf-8")
        res = run(cli, "audit", "--sessions", str(corpus), "--config", str(c.config),
                  "--out", str(work / f"mutant{i}.json"))
        c.expect(res.returncode == 1, f"engine exit {res.returncode} for mutation '{label}'")


def http(method, url, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as r:
            return r.status, r.read().decode()
    except urllib.error.HTTPError as e:
        return e.code, e.read().decode()


def check_api(c, cli, fixtures, work):
    report_path = work / "report.json"
    res = run(cli, "audit", "--sessions", str(fixtures), "--config", str(c.config),
              "--out", str(report_path))
    c.expect(res.returncode == 2, f"fixture audit exit code {res.returncode}")
    report = load(report_path)
    c.expect_valid(c.fragment("report"), report, "audit report")

    store = work / "store"
    proc = subprocess.Popen([cli, "serve", "--store", str(store), "--bind", "127.0.0.1:0",
                             "--report", str(report_path)],
                            stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stderr.readline()
        m = re.search(r":(\d+)\s*$", line)
        c.expect(m is not None, f"serve did not report a port: {line!r}")
        if m is None:
            return
        base = f"http://127.0.0.1:{m.group(1)}"

        status, body = http("GET", base + "/sites")
        c.expect(status == 200, "GET /sites status")
        sites = json.loads(body)
        c.expect_valid(c.fragment("site_list"), sites, "GET /sites")

        for entry in sites:
            sid = entry["site_id"]
            status, body = http("GET", f"{base}/sites/{sid}")
            detail = json.loads(body)
            c.expect(status == 200, f"GET /sites/{sid} status")
            c.expect_valid(c.fragment("site_detail"), detail, f"GET /sites/{sid}")
            for ref in sorted(detail["evidence_index"])[:5]:
                status, body = http("GET", f"{base}/sites/{sid}/evidence/{ref}")
                c.expect(status == 200, f"GET evidence {sid}/{ref} status")
                c.expect_valid(c.fragment("evidence"), json.loads(body), f"GET evidence {sid}/{ref}")

        answer = {"requirement": "R13", "outcome": "violation", "operator": "schema-check",
                  "note": "", "answered_at": "2024-03-03T09:00:00Z"}
        status, body = http("POST", base + "/sites/ebay_like/answers", answer)
        c.expect(status == 201, f"POST answer status {status}")
        c.expect_valid(c.fragment("answer_created"), json.loads(body), "POST answer 201")

        conflict = dict(answer, requirement="R1")
        status, body = http("POST", base + "/sites/ebay_like/answers", conflict)
        c.expect(status == 409, f"conflicting answer status {status}")
        c.expect_valid(c.fragment("error"), json.loads(body), "POST answer 409")

        status, body = http("POST", base + "/sites/ebay_like/answers", dict(answer, outcome="maybe"))
        c.expect(status == 422, f"invalid answer status {status}")
        c.expect_valid(c.fragment("error"), json.loads(body), "POST answer 422")

        status, body = http("GET", base + "/sites/nope")
        c.expect(status == 404, f"unknown site status {status}")
        c.expect_valid(c.fragment("error"), json.loads(body), "GET unknown site 404")

        status, body = http("GET", base + "/report")
        c.expect(status == 200, "GET /report status")
        served = json.loads(body)
        c.expect_valid(c.fragment("report"), served, "GET /report")
        c.expect(served["sites"][0]["verdicts"][12]["provenance"] == "operator",
                 "answer visible in GET /report")
    finally:
        proc.send_signal(signal.SIGTERM)
        try:
            code = proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            code = None
        c.expect(code == 0, f"serve exit code {code} after SIGTERM")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cli", required=True)
    parser.add_argument("--schemas", required=True, type=pathlib.Path)
    parser.add_argument("--fixtures", required=True, type=pathlib.Path)
    parser.add_argument("--config", required=True, type=pathlib.Path)
    args = parser.parse_args()

    c = Checker(args.schemas)
    c.config = args.config
    with tempfile.TemporaryDirectory() as tmp:
        work = pathlib.Path(tmp)
        check_sessions(c, args.cli, args.fixtures, work)
        check_api(c, args.cli, args.fixtures, work)
    print(f"{c.checked} checks, {c.failures} failures")
    return 1 if c.failures else 0


if __name__ == "__main__":
    sys.exit(main())
