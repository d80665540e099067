#!/usr/bin/env python3
"""Writes the scanner fixture workbooks into ../fixtures.

Every part is written by hand so the planted content is exactly what
fixtures/manifest.json lists. Uses only the standard library; entries get a
fixed timestamp so regenerated files are byte-identical.

    python3 crates/core/scripts/make_fixtures.py
"""

import os
import random
import zipfile

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures")

NS = 'xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main"'
NS_R = 'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships"'
REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'

DEFAULT_STYLES = (
    XML_DECL + f"<styleSheet {NS}>"
    '<fonts count="1"><font><sz val="11"/><name val="Calibri"/></font></fonts>'
    '<fills count="2"><fill><patternFill patternType="none"/></fill>'
    '<fill><patternFill patternType="gray125"/></fill></fills>'
    '<borders count="1"><border/></borders>'
    '<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>'
    '<cellXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0" xfId="0"/></cellXfs>'
    "</styleSheet>"
)


def esc(text):
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def sheet_xml(cells_xml, extra_before="", extra_after=""):
    return (
        XML_DECL
        + f"<worksheet {NS} {NS_R}>{extra_before}<sheetData>{cells_xml}</sheetData>{extra_after}</worksheet>"
    )


def row(r, cells, attrs=""):
    return f'<row r="{r}"{attrs}>{"".join(cells)}</row>'


def num(ref, v, s=None):
    style = f' s="{s}"' if s is not None else ""
    return f'<c r="{ref}"{style}><v>{v}</v></c>'


def text(ref, t, s=None):
    style = f' s="{s}"' if s is not None else ""
    return f'<c r="{ref}"{style} t="inlineStr"><is><t>{esc(t)}</t></is></c>'


def boolean(ref, b):
    return f'<c r="{ref}" t="b"><v>{1 if b else 0}</v></c>'


def formula(ref, f, v=None, t=None, fattrs=""):
    tattr = f' t="{t}"' if t else ""
    value = f"<v>{esc(str(v))}</v>" if v is not None else ""
    return f'<c r="{ref}"{tattr}><f{fattrs}>{esc(f)}</f>{value}</c>'


def write_package(name, sheets, *, defined_names=(), styles=DEFAULT_STYLES, shared_strings=None,
                  extra_parts=None, extra_workbook_rels=(), workbook_tail="", macro=False):
    """sheets: list of (name, state or None, xml)."""
    parts = {}
    overrides = []
    wb_rels = []
    sheet_entries = []
    for i, (sheet_name, state, xml) in enumerate(sheets, start=1):
        rid = f"rId{i}"
        parts[f"xl/worksheets/sheet{i}.xml"] = xml
        overrides.append((f"/xl/worksheets/sheet{i}.xml",
                          "application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"))
        wb_rels.append((rid, f"{REL}/worksheet", f"worksheets/sheet{i}.xml", None))
        state_attr = f' state="{state}"' if state else ""
        sheet_entries.append(f'<sheet name="{esc(sheet_name)}" sheetId="{i}"{state_attr} r:id="{rid}"/>')
    n = len(sheets)
    wb_rels.append((f"rId{n + 1}", f"{REL}/styles", "styles.xml", None))
    parts["xl/styles.xml"] = styles
    overrides.append(("/xl/styles.xml",
                      "application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"))
    if shared_strings is not None:
        items = "".join(f"<si><t>{esc(s)}</t></si>" for s in shared_strings)
        parts["xl/sharedStrings.xml"] = (
            XML_DECL + f'<sst {NS} count="{len(shared_strings)}" uniqueCount="{len(shared_strings)}">{items}</sst>'
        )
        wb_rels.append((f"rId{n + 2}", f"{REL}/sharedStrings", "sharedStrings.xml", None))
        overrides.append(("/xl/sharedStrings.xml",
                          "application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"))
    wb_rels.extend(extra_workbook_rels)
    names_xml = ""
    if defined_names:
        names_xml = "<definedNames>" + "".join(
            f'<definedName name="{esc(k)}">{esc(v)}</definedName>' for k, v in defined_names
        ) + "</definedNames>"
    parts["xl/workbook.xml"] = (
        XML_DECL + f"<workbook {NS} {NS_R}><sheets>{''.join(sheet_entries)}</sheets>"
        f"{names_xml}{workbook_tail}</workbook>"
    )
    main_type = ("application/vnd.ms-excel.sheet.macroEnabled.main+xml" if macro else
                 "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml")
    overrides.append(("/xl/workbook.xml", main_type))
    rels = "".join(
        f'<Relationship Id="{rid}" Type="{typ}" Target="{esc(target)}"'
        + (f' TargetMode="{mode}"' if mode else "") + "/>"
        for rid, typ, target, mode in wb_rels
    )
    parts["xl/_rels/workbook.xml.rels"] = XML_DECL + f'<Relationships xmlns="{PKG_REL}">{rels}</Relationships>'
    parts["_rels/.rels"] = (
        XML_DECL + f'<Relationships xmlns="{PKG_REL}">'
        f'<Relationship Id="rId1" Type="{REL}/officeDocument" Target="xl/workbook.xml"/></Relationships>'
    )
    for part, (content, content_type) in (extra_parts or {}).items():
        parts[part] = content
        if content_type:
            overrides.append(("/" + part, content_type))
    ct = (
        XML_DECL + '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
        '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
        '<Default Extension="xml" ContentType="application/xml"/>'
        '<Default Extension="bin" ContentType="application/vnd.ms-office.vbaProject"/>'
        + "".join(f'<Override PartName="{p}" ContentType="{t}"/>' for p, t in overrides)
        + "</Types>"
    )
    order = ["[Content_Types].xml"] + sorted(p for p in parts)
    parts["[Content_Types].xml"] = ct
    path = os.path.join(OUT, name)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as z:
        for p in order:
            info = zipfile.ZipInfo(p, date_time=(2019, 3, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            data = parts[p]
            z.writestr(info, data if isinstance(data, bytes) else data.encode("utf-8"))


def main():
    os.makedirs(OUT, exist_ok=True)

    write_package("empty.xlsx", [("Sheet1", None, sheet_xml(""))])

    # Information logging only: text and numbers, no formulas.
    write_package("logging_only.xlsx", [
        ("Log", None, sheet_xml(
            row(1, [text("A1", "Date"), text("B1", "Caller"), text("C1", "Minutes")])
            + row(2, [num("A2", 43466), text("B2", "Smith"), num("C2", 12)])
            + row(3, [num("A3", 43467), text("B3", "Jones"), num("C3", 7)])
        )),
    ])

    write_package("nested_ifs.xlsx", [
        ("Sheet1", None, sheet_xml(
            row(1, [boolean("A1", True), formula("B1", "IF(A1,IF(A2,1,2),3)", 2)])
            + row(2, [boolean("A2", False)])
        )),
    ])

    # Simple arithmetic with a shared formula block C1:C5 and a total.
    cells = []
    for r in range(1, 6):
        c = [num(f"B{r}", r * 10)]
        if r == 1:
            c.append(formula("C1", "B1*2", 20, fattrs=' t="shared" ref="C1:C5" si="0"'))
        else:
            c.append(f'<c r="C{r}"><f t="shared" si="0"/><v>{r * 20}</v></c>')
        cells.append(row(r, c))
    cells.append(row(6, [formula("C6", "SUM(C1:C5)", 300)]))
    write_package("simple_formulas.xlsx", [("Calc", None, sheet_xml("".join(cells)))],
                  shared_strings=["unused"])

    # One external workbook reference plus a hidden lookup sheet.
    ext_link = (
        XML_DECL + f'<externalLink {NS} {NS_R}><externalBook r:id="rId1"><sheetNames>'
        '<sheetName val="Book2"/></sheetNames></externalBook></externalLink>'
    )
    ext_rels = (
        XML_DECL + f'<Relationships xmlns="{PKG_REL}"><Relationship Id="rId1" '
        f'Type="{REL}/externalLinkPath" Target="Book2.xlsx" TargetMode="External"/></Relationships>'
    )
    write_package(
        "links.xlsx",
        [
            ("Summary", None, sheet_xml(
                row(1, [text("A1", "Imported"), formula("B1", "[1]Book2!A1", 10)])
                + row(2, [text("A2", "Rate"), formula("B2", "Rate*B1", 0.5)])
            )),
            ("Lookup", "hidden", sheet_xml(row(1, [num("A1", 0.05)]))),
        ],
        defined_names=[("Rate", "Lookup!$A$1")],
        extra_parts={
            "xl/externalLinks/externalLink1.xml": (
                ext_link, "application/vnd.openxmlformats-officedocument.spreadsheetml.externalLink+xml"),
            "xl/externalLinks/_rels/externalLink1.xml.rels": (ext_rels, None),
        },
        extra_workbook_rels=[("rId10", f"{REL}/externalLink", "externalLinks/externalLink1.xml", None)],
        workbook_tail='<externalReferences><externalReference r:id="rId10"/></externalReferences>',
    )

    # Very hidden sheet, two hidden rows and three hidden columns.
    write_package("very_hidden.xlsx", [
        ("Main", None, sheet_xml(
            row(1, [text("A1", "Total"), num("B1", 5)])
            + row(3, [num("A3", 1)], ' hidden="1"')
            + row(4, [num("A4", 2)], ' hidden="1"'),
            extra_before='<cols><col min="3" max="5" width="0" hidden="1" customWidth="1"/>'
                         '<col min="6" max="6" width="12" customWidth="1"/></cols>',
        )),
        ("Secret", "veryHidden", sheet_xml(row(1, [text("A1", "salary bands")]))),
    ])

    # Array formula anchored at B1 spilling over B1:B3.
    write_package("array_formula.xlsx", [
        ("Sheet1", None, sheet_xml(
            row(1, [num("A1", 1), formula("B1", "A1:A3*2", 2, fattrs=' t="array" ref="B1:B3"')])
            + row(2, [num("A2", 2), num("B2", 4)])
            + row(3, [num("A3", 3), num("B3", 6)])
        )),
    ])

    # Two formulas with cached error values and one healthy formula.
    write_package("error_value.xlsx", [
        ("Sheet1", None, sheet_xml(
            row(1, [num("A1", 0), formula("B1", "1/A1", "#DIV/0!", t="e")])
            + row(2, [formula("B2", "VLOOKUP(9,A1:A1,1,FALSE)", "#N/A", t="e")])
            + row(3, [formula("B3", "A1+1", 1)])
        )),
    ])

    write_package("protected.xlsx", [
        ("Rates", None, sheet_xml(
            row(1, [text("A1", "Rate"), num("B1", 0.035)]),
            extra_after='<sheetProtection algorithmName="SHA-512" hashValue="aGFzaA==" '
                        'saltValue="c2FsdA==" spinCount="100000" sheet="1" objects="1" scenarios="1"/>',
        )),
        ("Notes", None, sheet_xml(row(1, [text("A1", "open")]))),
    ])

    # White-on-white cells: style 1 is white font on a solid white fill.
    invisible_styles = (
        XML_DECL + f"<styleSheet {NS}>"
        '<fonts count="2"><font><sz val="11"/><name val="Calibri"/></font>'
        '<font><sz val="11"/><color rgb="FFFFFFFF"/><name val="Calibri"/></font></fonts>'
        '<fills count="3"><fill><patternFill patternType="none"/></fill>'
        '<fill><patternFill patternType="gray125"/></fill>'
        '<fill><patternFill patternType="solid"><fgColor rgb="FFFFFFFF"/><bgColor indexed="64"/></patternFill></fill></fills>'
        '<borders count="1"><border/></borders>'
        '<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>'
        '<cellXfs count="3"><xf numFmtId="0" fontId="0" fillId="0" borderId="0" xfId="0"/>'
        '<xf numFmtId="0" fontId="1" fillId="2" borderId="0" xfId="0" applyFont="1" applyFill="1"/>'
        '<xf numFmtId="0" fontId="1" fillId="0" borderId="0" xfId="0" applyFont="1"/></cellXfs>'
        "</styleSheet>"
    )
    write_package("invisible_cells.xlsx", [
        ("Sheet1", None, sheet_xml(
            row(1, [text("A1", "override=yes", s=1)])
            + row(2, [text("A2", "white text, no fill", s=2)])
            + row(3, ['<c r="A3" s="1"/>'])
            + row(4, [num("A4", 42, s=1)])
            + row(5, [text("A5", "plain")])
        )),
    ], styles=invisible_styles)

    write_package("macro.xlsm", [
        ("Sheet1", None, sheet_xml(row(1, [text("A1", "Run the macro")]))),
    ], extra_parts={"xl/vbaProject.bin": (b"\xd0\xcf\x11\xe0fake vba project", None)},
        extra_workbook_rels=[("rId20", "http://schemas.microsoft.com/office/2006/relationships/vbaProject",
                              "vbaProject.bin", None)],
        macro=True)

    pivot_table = (
        XML_DECL + f'<pivotTableDefinition {NS} name="PivotTable1" cacheId="1" dataCaption="Values">'
        '<location ref="D1:E3" firstHeaderRow="1" firstDataRow="1" firstDataCol="1"/></pivotTableDefinition>'
    )
    write_package("pivot.xlsx", [
        ("Data", None, sheet_xml(
            row(1, [text("A1", "Region"), text("B1", "Sales")])
            + row(2, [text("A2", "North"), num("B2", 10)])
            + row(3, [text("A3", "South"), num("B3", 20)])
        )),
    ], extra_parts={
        "xl/pivotTables/pivotTable1.xml": (
            pivot_table, "application/vnd.openxmlformats-officedocument.spreadsheetml.pivotTable+xml"),
    })

    write_package("controls_framework.xlsx", [
        ("Control", None, sheet_xml(row(1, [text("A1", "Doer"), text("B1", "Checker")]))),
        ("Validation", None, sheet_xml(row(1, [text("A1", "Checks done")]))),
        ("Documentation", None, sheet_xml(row(1, [text("A1", "Purpose")]))),
        ("Data", None, sheet_xml(row(1, [num("A1", 1), formula("B1", "A1*2", 2)]))),
    ])

    def ledger(total_cell):
        return sheet_xml(
            "".join(row(r, [text(f"A{r}", f"Item {r}"), num(f"B{r}", v)])
                    for r, v in zip(range(1, 5), [10, 11, 12, 9]))
            + row(5, [text("A5", "Total"), total_cell])
        )

    write_package("baseline.xlsx", [("Ledger", None, ledger(formula("B5", "SUM(B1:B4)", 42)))])
    write_package("baseline_mutated.xlsx", [("Ledger", None, ledger(num("B5", 42)))])

    with open(os.path.join(OUT, "encrypted.xlsx"), "wb") as f:
        header = bytes([0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1])
        f.write(header + bytes(4096 - len(header)))

    rng = random.Random(20190301)
    with open(os.path.join(OUT, "random-bytes.bin"), "wb") as f:
        f.write(bytes([0x42]) + bytes(rng.randrange(256) for _ in range(1023)))


if __name__ == "__main__":
    main()
