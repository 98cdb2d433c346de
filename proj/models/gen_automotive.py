#!/usr/bin/env python3
"""Generates automotive.cstl: seven concurrent subsystems under one shell.

Every region has the same skeleton (Off, On with six modes, Fault, Standby
and 25 transitions). A few transitions are replaced to plant three defects:

  * CC and CA both assign Vehicle.speed on `obstacle` (write conflict),
  * EVA_Slow and CA_Mitigate can be active together (undesired configuration),
  * `park` leaves both PA_On and its child PA_Search with overlapping guards
    (non-determinism).

Usage: gen_automotive.py [OUTPUT]   (default: automotive.cstl next to this file)
"""

import pathlib
import sys

REGIONS = ["CC", "CA", "PA", "LG", "EVA", "PSC", "RA"]
RENAME = {
    "CC_S1": "CC_Cruise", "CC_S2": "CC_Hold",
    "CA_S1": "CA_Monitor", "CA_S2": "CA_Mitigate",
    "EVA_S1": "EVA_Idle", "EVA_S2": "EVA_Slow",
    "PA_S1": "PA_Search", "PA_S2": "PA_Align",
}
SHARED_EVENTS = ["tick", "obstacle", "siren", "park", "sense"]
LOCAL_EVENTS = ["on", "off", "fault", "recover", "standby", "wake", "next", "prev"]


def n(name):
    return RENAME.get(name, name)


def region(p):
    cnt = f"{p}_cnt"
    modes = [n(f"{p}_S{k}") for k in range(1, 7)]
    ts = []

    def t(name, src, dst, ev, guard="", action=""):
        ts.append((name, src, dst, ev, guard, action))

    on_action = "dist := 0;" if p == "PA" else f"{cnt} := {cnt} + 1;"
    t(f"{p}_t_off", f"{p}_On", f"{p}_Off", f"{p}_off")
    t(f"{p}_t_on", f"{p}_Off", f"{p}_On", f"{p}_on", action=on_action)
    t(f"{p}_t_fault_on", f"{p}_On", f"{p}_Fault", f"{p}_fault")
    t(f"{p}_t_fault_off", f"{p}_Off", f"{p}_Fault", f"{p}_fault")
    t(f"{p}_t_recover", f"{p}_Fault", f"{p}_Off", f"{p}_recover")
    t(f"{p}_t_resume", f"{p}_Standby", f"{p}_On", f"{p}_recover")
    t(f"{p}_t_standby_on", f"{p}_On", f"{p}_Standby", f"{p}_standby")
    t(f"{p}_t_wake", f"{p}_Standby", f"{p}_On", f"{p}_wake")
    t(f"{p}_t_standby_off", f"{p}_Off", f"{p}_Standby", f"{p}_standby")
    for k in range(6):
        t(f"{p}_t_next{k + 1}", modes[k], modes[(k + 1) % 6], f"{p}_next", action=f"{cnt} := {cnt} + {k + 1};")
    for k in range(6):
        t(f"{p}_t_prev{k + 1}", modes[k], modes[(k - 1) % 6], f"{p}_prev")
    ticks = [(f"{p}_t_tick{k + 1}", modes[k], modes[k], "tick", "", f"{cnt} := {cnt} + 1;") for k in range(4)]

    # Seeded defects replace tick self-loops so the transition count stays fixed.
    if p == "CC":
        ticks[3] = (f"{p}_t_brake", modes[0], modes[1], "obstacle", "", "speed := speed - 1;")
    if p == "CA":
        ticks[3] = (f"{p}_t_mitigate", modes[0], modes[1], "obstacle", "", "speed := 0;")
    if p == "EVA":
        ticks[3] = (f"{p}_t_yield", modes[0], modes[1], "siren", "", f"{cnt} := {cnt} + 1;")
    if p == "PA":
        ticks[1] = (f"{p}_t_sense", modes[1], modes[1], "sense", "", "dist := min(dist + 1, 9);")
        ticks[2] = (f"{p}_t_abort", f"{p}_On", f"{p}_Off", "park", "[dist >= 2]", "")
        ticks[3] = (f"{p}_t_park", modes[0], modes[1], "park", "[dist <= 4]", "")
    ts.extend(ticks)

    lines = [f"    state {p} {{", f"      static {cnt} : int = 0;"]
    if p == "PA":
        lines.append("      static dist : int = 2;")
    lines.append(f"      state {p}_Off {{ }}")
    lines.append(f"      state {p}_On {{")
    lines.append(f"        entry {{ {cnt} := {cnt} + 1; }}")
    for m in modes:
        lines.append(f"        state {m} {{ }}")
    lines.append(f"        init {modes[0]};")
    lines.append("      }")
    lines.append(f"      state {p}_Fault {{ entry {{ {cnt} := 0; }} }}")
    lines.append(f"      state {p}_Standby {{ }}")
    lines.append(f"      init {p}_On;")
    for name, src, dst, ev, guard, action in ts:
        g = f" {guard}" if guard else ""
        a = f" / {{ {action} }}" if action else ""
        lines.append(f"      transition {name} : {src} -> {dst} on {ev}{g}{a};")
    lines.append("    }")
    return lines, len(ts), 11


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).with_name("automotive.cstl")
    events = [f"{p}_{e}" for p in REGIONS for e in LOCAL_EVENTS] + SHARED_EVENTS
    body, n_trans, n_states = [], 0, 2
    for p in REGIONS:
        lines, t, s = region(p)
        body += lines
        n_trans += t
        n_states += s
    text = [
        "// Generated by gen_automotive.py; edit the generator, not this file.",
        f"// {n_states} states, {n_trans} transitions, {len(events)} events.",
        "statechart Car {",
        "  events " + ", ".join(events) + ";",
        "  state Vehicle : shell {",
        "    static speed : int = 10;",
        *body,
        "  }",
        "  init Vehicle;",
        "}",
    ]
    out.write_text("\n".join(text) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
