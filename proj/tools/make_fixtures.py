#!/usr/bin/env python3
"""Regenerates the hand-built fixture sessions under fixtures/.

Each fixture mimics one real-world pattern (advertising cookie set before any
choice, identifier sent to a third party, consent wall, viewport-dependent
banner). Run from the repository root: python3 tools/make_fixtures.py
"""

import datetime as dt
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
CAPTURED_AT = dt.datetime(2024, 3, 1, 10, 0, 0, tzinfo=dt.timezone.utc)
DESKTOP = {"width_px": 1366, "height_px": 768}
MOBILE = {"width_px": 375, "height_px": 667}


def utc(t_ms, days=0):
    t = CAPTURED_AT + dt.timedelta(milliseconds=t_ms, days=days)
    return t.replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def cookie(name, value, domain, t_ms, days=None, source="header"):
    c = {"name": name, "value": value, "domain": domain, "path": "/"}
    if days is not None:
        c["expiry"] = utc(t_ms, days)
    c["set_time"] = utc(t_ms)
    c["source"] = source
    return c


def request(t, rid, url, cookies_sent=(), query_params=()):
    return {"t": t, "kind": "request", "id": rid, "url": url, "method": "GET",
            "headers": [["Accept", "*/*"]], "cookies_sent": list(cookies_sent),
            "query_params": [list(p) for p in query_params]}


def response(t, rid, set_cookies=()):
    return {"t": t, "kind": "response", "request_id": rid, "status": 200,
            "set_cookies": list(set_cookies)}


def snapshot(t, cookies=(), local_storage=()):
    return {"t": t, "kind": "storage_snapshot", "cookies": list(cookies),
            "local_storage": list(local_storage)}


def dom(t, banners, interactive=True, text=None, shot=None):
    d = {"t": t, "kind": "dom_snapshot", "banner_candidates": banners,
         "page_interactive": interactive}
    if text is not None:
        d["info_page_text"] = text
    if shot is not None:
        d["screenshot_ref"] = shot
    return d


def banner(selector, x, y, w, h, blocking=False, text="We use cookies."):
    return {"selector": selector, "bounding_box": {"x": x, "y": y, "w": w, "h": h},
            "is_overlay_blocking": blocking, "text": text}


def session(site_url, scenario, events, viewport=DESKTOP, profile="fixture-a"):
    return {"format_version": 1, "site_url": site_url, "scenario": scenario,
            "viewport": viewport, "profile_id": profile,
            "captured_at": utc(0), "events": events}


def write(site, name, doc):
    d = ROOT / site
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(json.dumps(doc, indent=2) + "\n")


def ebay_like():
    url = "https://www.ebay-like.fixture.test/"
    host = "www.ebay-like.fixture.test"
    for profile, ide in (("fixture-a", "AHWqTUnv8YqDdlOyW1pJbXQ0fR2sJk9ZfQm3xG7cL5aE1pT6hV"),
                         ("fixture-b", "AHWqTUkR3oPq9zXc2VbN8mL4kJ7hG6fD5sA1pO0iU9yT8rE3wQ")):
        lb = cookie("lb", "node-3", host, 300)
        ide_c = cookie("IDE", ide, ".doubleclick.net", 1400, days=390)
        events = [
            snapshot(0),
            request(100, "r1", url),
            response(300, "r1", [lb]),
            request(1200, "r2", "https://ad.doubleclick.net/ddm/activity"),
            response(1400, "r2", [ide_c]),
            dom(2000, [banner(".gdpr-banner", 0, 600, 1366, 168)], True),
            snapshot(5000, [ide_c, lb]),
        ]
        name = "no_action.session.json" if profile == "fixture-a" else "no_action-twin.session.json"
        write("ebay_like", name, session(url, "no_action", events, profile=profile))


def w3schools_like():
    url = "https://www.w3schools-like.fixture.test/"
    host = "www.w3schools-like.fixture.test"
    nid_value = "511=Xk2pQ9rLmT4vB7nW1cY8dF3gH6jK0sZ5aE2uI9oP4lM7qR1tV3wX6yB8nC0dG5fJ"
    lb = cookie("lb", "node-1", host, 200)

    def events(first_t, action=None):
        nid = cookie("NID", nid_value, ".google.com", first_t + 200, days=183)
        ev = [snapshot(0), request(100, "r1", url), response(200, "r1", [lb]),
              dom(1000, [banner(".cc-window", 0, 700, 1366, 68)], True)]
        tail = [request(first_t, "r2", "https://cse.google.com/cse.js"),
                response(first_t + 200, "r2", [nid]),
                request(first_t + 400, "r3", "https://cse.google.com/cse/element/v1",
                        cookies_sent=[nid], query_params=[("cx", "partner-pub-1")])]
        if action:
            ev += [snapshot(1500, [lb]), {"t": 3000, "kind": "user_action", "action": action}]
        ev += tail
        ev.append(snapshot(first_t + 1000, [lb, nid]))
        return ev

    write("w3schools_like", "no_action.session.json", session(url, "no_action", events(1200)))
    write("w3schools_like", "accept_all.session.json",
          session(url, "accept_all", events(4000, "accept_all"), profile="fixture-c"))


def fandom_like():
    url = "https://www.fandom-like.fixture.test/"
    host = "www.fandom-like.fixture.test"
    lb = cookie("lb", "node-2", host, 200)
    events = [snapshot(0), request(100, "r1", url), response(200, "r1", [lb]),
              dom(1500, [banner(".fc-consent-root", 0, 0, 1366, 768, blocking=True,
                                text="Accept | Reject")], False,
                  shot="fandom_like/no_action-banner.png"),
              snapshot(4000, [lb])]
    write("fandom_like", "no_action.session.json", session(url, "no_action", events))


def lbc_like():
    url = "https://www.lbc-like.fixture.test/"
    host = "www.lbc-like.fixture.test"
    lb = cookie("lb", "node-5", host, 200)
    desktop = [snapshot(0), request(100, "r1", url), response(200, "r1", [lb]),
               dom(1500, [banner("#didomi-host", 0, 676, 1366, 92)], True),
               snapshot(4000, [lb])]
    mobile = [snapshot(0), request(100, "r1", url), response(200, "r1", [lb]),
              dom(1500, [banner("#didomi-host", 0, 147, 375, 520, blocking=True)], False),
              snapshot(4000, [lb])]
    write("lbc_like", "no_action-desktop.session.json", session(url, "no_action", desktop))
    write("lbc_like", "no_action-mobile.session.json",
          session(url, "no_action", mobile, viewport=MOBILE, profile="fixture-m"))


if __name__ == "__main__":
    ebay_like()
    w3schools_like()
    fandom_like()
    lbc_like()
