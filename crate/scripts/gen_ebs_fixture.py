#!/usr/bin/env python3
"""Generate the synthetic EBS diagnostic-specification fixture.

Writes crates/core/fixtures/ebs_synthetic.csv. The population is laid out so
that the default funnel yields 720 -> 500 -> 330 -> 60 -> {20 startup, 40
residual} and the DTC table holds exactly 210 distinct codes.

Layout:
  * 330 safety-relevant internal monitors: 54 per-wheel classes x 6 wheel
    positions plus 6 unlocated monitors; 18 wheel classes and 2 unlocated
    monitors are detected at startup.
  * 220 monitors of failures originating outside the subsystem.
  * 170 internal monitors dropped by the lamp/trailer/driver stage: 100
    yellow-lamp, 40 trailer-only, 30 foot-brake-module.

Re-run from the repository root: python3 scripts/gen_ebs_fixture.py
"""

import csv
import io
import pathlib

HEADER = [
    "monitor_id", "description", "trigger_condition", "healing_condition",
    "system_reaction", "dtc_codes", "lamp", "affected_functions", "part_id",
    "location", "failure_origin", "trailer_related", "affects_tractor",
    "detection_phase",
]
WHEELS = ["FL", "FR", "R1L", "R1R", "R2L", "R2R"]

rows = []
dtcs = []


def new_dtc(desc, snapshot):
    code = "C%04d" % (1000 + len(dtcs))
    dtcs.append((code, desc, snapshot))
    return code


def row(**kw):
    base = {
        "healing_condition": "",
        "dtc_codes": [],
        "part_id": "",
        "location": "",
        "failure_origin": "INTERNAL",
        "trailer_related": "false",
        "affects_tractor": "true",
        "detection_phase": "CONTINUOUS",
    }
    base.update(kw)
    rows.append(base)


# --- 330 safety-relevant internal monitors -------------------------------
WHEEL_KINDS = [
    ("PCM", "Pressure control module", "valve current out of range",
     "valve current above 2.5 A for 200 ms", "degrade brake_pressure_control; degrade braking_torque; notify RETARDER",
     ["brake_pressure_control", "braking_torque"]),
    ("WSS", "Wheel speed sensor", "signal implausible",
     "speed deviation above 15 percent for 500 ms", "disable abs; degrade wheel_speed; notify ADI",
     ["wheel_speed", "abs"]),
    ("BCH", "Brake chamber", "pressure build-up too slow",
     "chamber pressure below setpoint for 300 ms", "switch wheel to pneumatic backup",
     ["service_braking"]),
]
for k in range(54):
    part, comp, fault, trig, reaction, funcs = WHEEL_KINDS[k % 3]
    lamp = "NONE" if k % 5 == 4 else "RED"
    phase = "STARTUP" if k < 18 else ("UNKNOWN" if k % 7 == 0 else "CONTINUOUS")
    code = new_dtc("%s %02d %s" % (comp, k, fault), ["vehicle_speed", "supply_voltage", "brake_demand"])
    for loc in WHEELS:
        row(
            monitor_id="EBS-%s%02d-%s" % (part, k, loc),
            description="%s %02d %s at %s" % (comp, k, fault, loc),
            trigger_condition="%s at %s" % (trig, loc),
            healing_condition="" if k % 4 == 0 else "fault absent for one ignition cycle",
            system_reaction=reaction,
            dtc_codes=[code],
            lamp=lamp,
            affected_functions=funcs,
            part_id=part,
            location=loc,
            detection_phase=phase,
        )

ECU_SINGLES = [
    ("EBS-ECU-001", "ECU RAM check failed", "checksum mismatch at power-up", "disable esp", ["esp"], "ECU", "STARTUP", "RED"),
    ("EBS-ECU-002", "Brake pressure sensor supply shorted", "sensor supply below 4.5 V at power-up", "degrade service_braking", ["service_braking"], "ECU", "STARTUP", "RED"),
    ("EBS-ECU-003", "Redundant circuit pressure mismatch", "circuit 1 and 2 differ by 1.5 bar", "degrade service_braking; notify ADI", ["service_braking", "braking_torque"], "RES", "CONTINUOUS", "RED"),
    ("EBS-ECU-004", "Stability control yaw sensor frozen", "yaw rate constant for 2 s while steering", "disable esp", ["esp"], "ECU", "CONTINUOUS", "RED"),
    ("EBS-TCM-005", "Trailer control valve pressure feedback lost", "feedback below 0.2 bar with demand", "reduce tractor deceleration split", ["service_braking"], "TCM", "CONTINUOUS", "RED"),
    ("EBS-TCM-006", "Trailer supply line leak", "supply pressure drop above 1 bar/s", "notify ADI", ["service_braking"], "TCM", "UNKNOWN", "NONE"),
]
for i, (mid, desc, trig, reaction, funcs, part, phase, lamp) in enumerate(ECU_SINGLES):
    codes = [] if i == 3 else [new_dtc(desc, ["supply_voltage"])]
    row(
        monitor_id=mid, description=desc, trigger_condition=trig,
        system_reaction=reaction, dtc_codes=codes, lamp=lamp,
        affected_functions=funcs, part_id=part, detection_phase=phase,
        trailer_related="true" if part == "TCM" else "false",
    )

# --- 220 monitors of externally originating failures ---------------------
EXTERNAL = [
    ("Supply voltage below 18 V", "supply voltage below 18 V for 1 s", ["service_braking", "abs"], "RED", "POWER"),
    ("CAN timeout from retarder", "retarder status message missing for 500 ms", ["braking_torque"], "YELLOW", "CAN"),
    ("Steering angle signal invalid on CAN", "steering angle message invalid for 200 ms", ["esp"], "YELLOW", "CAN"),
    ("Engine brake status message missing", "engine brake status missing for 500 ms", ["braking_torque"], "NONE", "CAN"),
    ("Gear information missing from transmission", "gear message missing for 1 s", ["abs", "esp"], "NONE", "CAN"),
    ("Electronic brake request from ADI missing", "brake request message missing for 100 ms", ["service_braking"], "RED", "CAN"),
    ("Trailer CAN line interrupted", "ISO 11992 line silent for 1 s", ["trailer_braking"], "YELLOW", "TRL"),
    ("Supply voltage above 32 V", "supply voltage above 32 V for 1 s", ["service_braking", "abs"], "RED", "POWER"),
]
ext_codes = []
for i in range(220):
    desc, trig, funcs, lamp, src = EXTERNAL[i % 8]
    n = i // 8 + 1
    if i < 142:
        if i % 2 == 0:
            ext_codes.append(new_dtc("%s group %02d" % (desc, i // 2), ["supply_voltage", "bus_load"]))
        codes = [ext_codes[-1]]
    else:
        codes = []
    row(
        monitor_id="EBS-EXT-%03d" % (i + 1),
        description="%s (source %02d)" % (desc, n),
        trigger_condition=trig,
        healing_condition="signal restored for 2 s",
        system_reaction="notify ADI",
        dtc_codes=codes,
        lamp=lamp,
        affected_functions=funcs,
        part_id="ECU",
        failure_origin="EXTERNAL",
        trailer_related="true" if src == "TRL" else "false",
        affects_tractor="false" if src == "TRL" else "true",
    )

# --- 170 monitors dropped by the lamp/trailer/driver stage ----------------
for k in range(15):
    code = new_dtc("Brake lining %02d worn" % k, ["lining_thickness", "odometer"])
    for loc in WHEELS:
        row(
            monitor_id="EBS-BLW%02d-%s" % (k, loc),
            description="Brake lining %02d wear limit approaching at %s" % (k, loc),
            trigger_condition="remaining lining below %d mm at %s" % (3 + k % 3, loc),
            system_reaction="request workshop visit",
            dtc_codes=[code], lamp="YELLOW",
            affected_functions=["lining_wear_control"], part_id="BLW", location=loc,
        )
for k in range(10):
    desc = "Reservoir %02d pressure low" % (k + 1)
    row(
        monitor_id="EBS-RES-%03d" % (k + 1), description=desc,
        trigger_condition="reservoir pressure below %.1f bar" % (6.0 + k * 0.1),
        healing_condition="pressure above cut-in for 10 s",
        system_reaction="request compressor",
        dtc_codes=[new_dtc(desc, ["reservoir_pressure"])], lamp="YELLOW",
        affected_functions=["service_braking"], part_id="RES",
    )
for k in range(40):
    desc = "Trailer brake output %02d open load" % (k + 1)
    row(
        monitor_id="EBS-TRL-%03d" % (k + 1), description=desc,
        trigger_condition="trailer control output current below 50 mA (channel %02d)" % (k + 1),
        system_reaction="disable trailer_braking",
        dtc_codes=[new_dtc(desc, ["trailer_demand"])], lamp=["RED", "YELLOW", "NONE"][k % 3],
        affected_functions=["trailer_braking"], part_id="TCM",
        trailer_related="true", affects_tractor="false",
    )
fbm_codes = []
for k in range(30):
    if k % 2 == 0:
        fbm_codes.append(new_dtc("Foot brake module fault group %02d" % (k // 2), ["pedal_travel", "brake_demand"]))
    codes = [fbm_codes[-1]]
    if k == 1:
        codes = [fbm_codes[0], fbm_codes[-1]] if len(fbm_codes) > 1 else codes
    if k == 3:
        codes = [fbm_codes[0], fbm_codes[1]]
    desc = "Foot brake module channel %02d implausible" % (k + 1)
    row(
        monitor_id="EBS-FBM-%03d" % (k + 1), description=desc,
        trigger_condition="pedal travel sensors disagree by 8 percent (check %02d)" % (k + 1),
        healing_condition="sensors agree for 5 s",
        system_reaction="degrade service_braking",
        dtc_codes=codes, lamp="RED" if k < 20 else "YELLOW",
        affected_functions=["service_braking"], part_id="FBM",
        detection_phase="STARTUP" if k % 5 == 0 else "CONTINUOUS",
    )

assert len(rows) == 720, len(rows)
assert len(dtcs) == 210, len(dtcs)

out = io.StringIO()
out.write("# Synthetic EBS diagnostic specification (generated by scripts/gen_ebs_fixture.py)\n")
out.write("#@subsystem EBS\n")
out.write("#@source ebs_synthetic.csv, synthetic supplier export 2016-09-01\n")
w = csv.writer(out, lineterminator="\n")
w.writerow(HEADER)
for r in rows:
    w.writerow([
        r["monitor_id"], r["description"], r["trigger_condition"], r["healing_condition"],
        r["system_reaction"], ";".join(r["dtc_codes"]), r["lamp"], ";".join(r["affected_functions"]),
        r["part_id"], r["location"], r["failure_origin"], r["trailer_related"],
        r["affects_tractor"], r["detection_phase"],
    ])
out.write("#@dtc_section\n")
w.writerow(["dtc_code", "description", "snapshot_fields"])
for code, desc, snap in dtcs:
    w.writerow([code, desc, ";".join(snap)])

path = pathlib.Path(__file__).resolve().parent.parent / "crates/core/fixtures/ebs_synthetic.csv"
path.parent.mkdir(parents=True, exist_ok=True)
path.write_text(out.getvalue())
print("wrote", path, len(rows), "monitors", len(dtcs), "dtcs")
