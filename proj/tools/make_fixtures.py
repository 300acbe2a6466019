#!/usr/bin/env python3
"""Writes the synthetic discharge-letter containers under fixtures/.

Output is byte-stable: fixed timestamps, fixed entry order.
"""
import struct
import sys
import zipfile
import zlib
from pathlib import Path

NS = (
    'xmlns:office="http://openoffice.org/2000/office" '
    'xmlns:style="http://openoffice.org/2000/style" '
    'xmlns:text="http://openoffice.org/2000/text" '
    'xmlns:fo="http://www.w3.org/1999/XSL/Format" '
    'xmlns:draw="http://openoffice.org/2000/drawing" '
    'xmlns:xlink="http://www.w3.org/1999/xlink"'
)

STYLES = f"""<?xml version="1.0" encoding="UTF-8"?>
<office:document-styles {NS} office:version="1.0">
 <office:styles>
  <style:style style:name="Standard" style:family="paragraph"/>
  <style:style style:name="Heading" style:family="paragraph" style:parent-style-name="Standard">
   <style:properties fo:font-weight="bold"/>
  </style:style>
  <style:style style:name="Heading 1" style:family="paragraph" style:parent-style-name="Heading" style:default-outline-level="1"/>
 </office:styles>
</office:document-styles>
"""

AUTOMATIC = """ <office:automatic-styles>
  <style:style style:name="P1" style:family="paragraph" style:parent-style-name="Heading"/>
  <style:style style:name="T1" style:family="text"><style:properties style:text-background-color="#FFFF00"/></style:style>
  <style:style style:name="T2" style:family="text"><style:properties style:text-background-color="#00ff00"/></style:style>
  <style:style style:name="T3" style:family="text"><style:properties fo:font-weight="bold"/></style:style>
 </office:automatic-styles>
"""


def content(body):
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<office:document-content {NS} office:version="1.0">\n'
        f"{AUTOMATIC} <office:body>\n{body} </office:body>\n</office:document-content>\n"
    )


def heading(title):
    return f'  <text:p text:style-name="P1">{title}:</text:p>\n'


def para(text):
    return f'  <text:p text:style-name="Standard">{text}</text:p>\n'


def items(entries, tag="text:unordered-list"):
    out = f"  <{tag}>\n"
    for e in entries:
        if isinstance(e, tuple):
            text, nested = e
            out += f"   <text:list-item><text:p>{text}</text:p>\n"
            out += "   " + items(nested).strip() + "\n"
            out += "   </text:list-item>\n"
        else:
            out += f"   <text:list-item><text:p>{e}</text:p></text:list-item>\n"
    return out + f"  </{tag}>\n"


LETTER = (
    '  <text:h text:style-name="Heading 1" text:level="1">'
    "Fallbeispiel: Chronische myeloische Leukämie</text:h>\n"
    + heading("Einleitung")
    + para("Ein 54-jähriger Patient wird vom Hausarzt zur Abklärung einer Leukozytose überwiesen.")
    + '  <text:p text:style-name="Standard"><text:span text:style-name="T3">Anamnese:</text:span>'
    " Seit drei Monaten zunehmende Müdigkeit und Druckgefühl im linken Oberbauch.</text:p>\n"
    + heading("Befund")
    + para(
        'Tastbare <text:span text:style-name="T1">Splenomegalie</text:span> etwa 4 cm unter dem '
        'Rippenbogen. Im Blutbild <text:span text:style-name="T2">Leukozytose von 85.000/µl</text:span>'
        " mit Linksverschiebung."
    )
    + heading("Untersuchungen")
    + items(["Blutbild", "Abdomensonographie", "Knochenmarkpunktion", "Blutbild"])
    + heading("Diagnosen")
    + items(
        [
            (
                '<text:span text:style-name="T1">Chronische myeloische Leukämie</text:span>',
                ["BCR-ABL-positiv", "Chronische Phase"],
            ),
            '<text:span text:style-name="T2">Hyperleukozytose</text:span>',
            "Arterielle Hypertonie",
        ],
        tag="text:ordered-list",
    )
    + heading("Therapie")
    + para("Imatinib 400 mg täglich")
    + para("Allopurinol 300 mg täglich")
    + heading("Bildgebung")
    + para(
        '<draw:image draw:name="Sonographie Milz" xlink:href="#Pictures/milz.png"'
        ' draw:style-name="fr1"/>'
    )
    + para("Sonographisch vergrößerte Milz mit 17 cm Längsdurchmesser.")
    + heading("Epikrise")
    + para("Unter Imatinib rasche hämatologische Remission; Verlaufskontrolle in vier Wochen.")
)

TWO_COLORS = (
    '  <text:h text:style-name="Heading 1" text:level="1">Fallbeispiel: Zwei Farben</text:h>\n'
    + heading("Befund")
    + para(
        '<text:span text:style-name="T1">Ikterus</text:span> und '
        '<text:span text:style-name="T2">Aszites</text:span> bei Aufnahme.'
    )
    + heading("Diagnosen")
    + items(
        [
            '<text:span text:style-name="T1">Hepatitis</text:span>',
            '<text:span text:style-name="T2">Leberzirrhose</text:span>',
        ]
    )
)


def png(width, height, rgb):
    def chunk(kind, data):
        return (
            struct.pack(">I", len(data))
            + kind
            + data
            + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF)
        )

    raw = b"".join(b"\x00" + bytes(rgb) * width for _ in range(height))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0))
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def write_container(path, body, pictures):
    stamp = (2005, 1, 1, 0, 0, 0)
    with zipfile.ZipFile(path, "w") as z:
        info = zipfile.ZipInfo("mimetype", stamp)
        z.writestr(info, "application/vnd.sun.xml.writer", zipfile.ZIP_STORED)
        for name, data in [("content.xml", content(body).encode()), ("styles.xml", STYLES.encode())]:
            z.writestr(zipfile.ZipInfo(name, stamp), data, zipfile.ZIP_DEFLATED)
        for name, data in pictures:
            z.writestr(zipfile.ZipInfo(name, stamp), data, zipfile.ZIP_STORED)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_container(out / "letter.sxw", LETTER, [("Pictures/milz.png", png(4, 3, (200, 180, 40)))])
    write_container(out / "two-colors.sxw", TWO_COLORS, [])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures")
