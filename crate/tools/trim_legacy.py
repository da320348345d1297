"""Write the first N stages of a current-format OpenCV cascade in the legacy
Haar XML dialect, copying every number verbatim.

    python3 tools/trim_legacy.py fixtures/cascades/haarcascade_frontalface_default.xml 2 \
        > fixtures/cascades/frontalface_legacy_2stages.xml
"""

import sys
import xml.etree.ElementTree as ET


def main(path, n_stages):
    root = ET.parse(path).getroot()
    casc = root.find("cascade")
    w, h = casc.findtext("width").strip(), casc.findtext("height").strip()
    features = casc.find("features").findall("_")
    out = ['<?xml version="1.0"?>', "<opencv_storage>", '<face_trimmed type_id="opencv-haar-classifier">', f"  <size>{w} {h}</size>", "  <stages>"]
    for si, stage in enumerate(casc.find("stages").findall("_")[:n_stages]):
        out.append("    <_>")
        out.append("      <trees>")
        for weak in stage.find("weakClassifiers").findall("_"):
            nodes = weak.findtext("internalNodes").split()
            leaves = weak.findtext("leafValues").split()
            feat = features[int(nodes[2])]
            out.append("        <_>")
            out.append("          <_>")
            out.append("            <feature>")
            out.append("              <rects>")
            for r in feat.find("rects").findall("_"):
                out.append(f"                <_>{' '.join(r.text.split())}</_>")
            out.append("              </rects>")
            out.append("              <tilted>0</tilted>")
            out.append("            </feature>")
            out.append(f"            <threshold>{nodes[3]}</threshold>")
            out.append(f"            <left_val>{leaves[0]}</left_val>")
            out.append(f"            <right_val>{leaves[1]}</right_val>")
            out.append("          </_>")
            out.append("        </_>")
        out.append("      </trees>")
        out.append(f"      <stage_threshold>{stage.findtext('stageThreshold').strip()}</stage_threshold>")
        out.append(f"      <parent>{si - 1}</parent>")
        out.append("      <next>-1</next>")
        out.append("    </_>")
    out += ["  </stages>", "</face_trimmed>", "</opencv_storage>"]
    print("\n".join(out))


if __name__ == "__main__":
    main(sys.argv[1], int(sys.argv[2]))
