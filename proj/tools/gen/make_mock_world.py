#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes data/mock_world.json, the hand-authored part of the offline world."""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[2]

nouns = [
    {"noun": "web server", "slug": "web-server", "entities": ["Nginx"]},
    {"noun": "茶叶", "slug": "cha-ye", "entities": ["碧岩茶社", "云栖茶研所", "林沐川", "松涧茶园"]},
    {"noun": "indie game", "slug": "indie-game",
     "entities": ["Lanternfall", "Quillmoth Studio", "Sword in the Stone", "Gloamweave Tunic"]},
    {"noun": "lighthouse", "slug": "lighthouse"},
    {"noun": "harpsichord", "slug": "harpsichord"},
    {"noun": "lichen", "slug": "lichen"},
    {"noun": "letterpress", "slug": "letterpress"},
    {"noun": "comet", "slug": "comet"},
    {"noun": "salt marsh", "slug": "salt-marsh"},
    {"noun": "typewriter", "slug": "typewriter"},
    {"noun": "folk dance", "slug": "folk-dance"},
    {"noun": "bookbinding", "slug": "bookbinding"},
    {"noun": "glacier", "slug": "glacier"},
    {"noun": "pipe organ", "slug": "pipe-organ"},
    {"noun": "sundial", "slug": "sundial"},
    {"noun": "moth", "slug": "moth"},
]

E = {}


def ent(name, description, facts, relations, language="en", kind="entity"):
    E[name] = {"description": description, "facts": facts, "relations": relations, "language": language,
               "kind": kind}


ent("Nginx", "open-source HTTP server",
    ["Nginx is an open-source HTTP server that also works as a reverse proxy and load balancer.",
     "nginx was publicly released in 2004",
     "Nginx handles client connections with an asynchronous, event-driven architecture."],
    {"Igor Sysoev": "Igor Sysoev wrote the first versions of Nginx",
     "BSD license": "Nginx is distributed under a 2-clause BSD license"}, kind="software project")
ent("Igor Sysoev", "software engineer",
    ["Igor Sysoev is a software engineer who began developing Nginx in 2002.",
     "Igor Sysoev worked as a system administrator before the project became public."],
    {"Nginx": "Igor Sysoev created Nginx",
     "Rambler": "Igor Sysoev was working at Rambler when he started Nginx"}, kind="person")
ent("Rambler", "web portal",
    ["Rambler is a web portal launched in 1996.",
     "Rambler was one of the early large users of Nginx."],
    {"Igor Sysoev": "Igor Sysoev was an employee of Rambler"}, kind="organization")
ent("BSD license", "permissive software license",
    ["The 2-clause BSD license is a permissive free software license.",
     "The BSD license family originated at a university computing research group in the late 1980s."],
    {"Nginx": "Nginx is released under the 2-clause BSD license"}, kind="license")

ent("Lanternfall", "hand-drawn exploration game",
    ["Lanternfall is a hand-drawn exploration game released by Quillmoth Studio in 2021.",
     "Lanternfall sold fewer than 40000 copies in its first year.",
     "Lanternfall includes a crafting system built around glowing moth silk."],
    {"Quillmoth Studio": "Quillmoth Studio developed Lanternfall",
     "Mirestep Caverns": "Mirestep Caverns is the final region of Lanternfall",
     "Sword in the Stone": "Sword in the Stone is a consumable item in Lanternfall"}, kind="video game")
ent("Quillmoth Studio", "three-person game studio",
    ["Quillmoth Studio is a three-person game studio based in Tampere.",
     "Quillmoth Studio was founded in 2016."],
    {"Lanternfall": "Quillmoth Studio made Lanternfall",
     "Gloamweave Tunic": "Quillmoth Studio designed the Gloamweave Tunic as a signature item"}, kind="organization")
ent("Sword in the Stone", "consumable item",
    ["In Lanternfall, Sword in the Stone is a consumable that restores stamina.",
     "The recipe for Sword in the Stone can be bought from a merchant aboard the airship Kestrel Vane."],
    {"Lanternfall": "Sword in the Stone appears in Lanternfall",
     "Gloamweave Tunic": "Sword in the Stone is crafted at the same bench as the Gloamweave Tunic"}, kind="item")
ent("Gloamweave Tunic", "glowing garment",
    ["The Gloamweave Tunic is a garment that glows in the dark once enhanced with moth silk.",
     "The Gloamweave Tunic needs five upgrades to reach its final form."],
    {"Mirestep Caverns": "Moth silk for the Gloamweave Tunic drops in Mirestep Caverns"}, kind="item")
ent("Mirestep Caverns", "flooded cave region",
    ["Mirestep Caverns is a flooded cave system in Lanternfall.",
     "Mirestep Caverns is inhabited by wrapped, mummy-like moth keepers."],
    {"Lanternfall": "Mirestep Caverns is part of Lanternfall"}, kind="place")

ent("碧岩茶社", "武夷山的小型茶社",
    ["碧岩茶社是一家位于武夷山脚下的小型茶社。", "碧岩茶社创立于1996年。", "碧岩茶社保存着四十多份手写焙火记录。"],
    {"林沐川": "林沐川是碧岩茶社的创办人", "云栖茶研所": "碧岩茶社与云栖茶研所合作整理古法焙火工艺"},
    language="zh", kind="organization")
ent("云栖茶研所", "乌龙茶品种选育机构",
    ["云栖茶研所是一家专注于乌龙茶品种选育的民间研究机构。", "云栖茶研所成立于2003年。"],
    {"松涧茶园": "云栖茶研所在松涧茶园设有试验田", "碧岩茶社": "云栖茶研所为碧岩茶社提供焙火温度数据"},
    language="zh", kind="organization")
ent("林沐川", "制茶师",
    ["林沐川是一位制茶师，出生于1958年。", "林沐川曾撰写过一本关于岩茶烘焙的小册子。"],
    {"碧岩茶社": "林沐川创办了碧岩茶社", "松涧茶园": "林沐川年轻时在松涧茶园学艺"},
    language="zh", kind="person")
ent("松涧茶园", "高山茶园",
    ["松涧茶园是一座海拔约六百米的高山茶园。", "松涧茶园始建于1972年。"],
    {"云栖茶研所": "松涧茶园为云栖茶研所提供试验用地"},
    language="zh", kind="place")

famous = {
    "UNESCO": ["UNESCO is a specialized agency of the United Nations for education, science and culture.",
               "UNESCO maintains lists of heritage sites around the world."],
    "Paris": ["Paris is the capital and largest city of France.",
              "Paris hosts a large number of museums and galleries."],
    "Google": ["Google is a technology company known for its web search engine.",
               "Google runs large book and archive digitization programs."],
    "Wikipedia": ["Wikipedia is a free online encyclopedia written by volunteers."],
    "BBC": ["The BBC is a public service broadcaster headquartered in London."],
    "NASA": ["NASA is the civil space agency of the United States."],
    "European Union": ["The European Union is a political and economic union of European member states."],
    "Mozilla": ["Mozilla is a free software community that develops the Firefox browser."],
}
for name, facts in famous.items():
    ent(name, "widely known entity", facts, {}, kind="famous")

pages = {
    "https://web.mock/indie-game/1": {
        "content_type": "text/html; charset=utf-8",
        "html": """<!DOCTYPE html>
<html><head><title>Lanternfall review</title><style>.nav{color:#333}</style>
<script>var tracker = "Zorvath Analytics Guild"; window.ads = [];</script></head>
<body><nav><a href="/">Home</a> | <a href="/reviews">Reviews</a> | <a href="/login">Log in</a></nav>
<article>
<h1>Lanternfall: a small game about big caves</h1>
<p>Lanternfall is the debut title of Quillmoth Studio, a team of three people working out of a former print shop.
It sold modestly, but players who found it tend to talk about it for years.</p>
<p>The late game sends you into Mirestep Caverns, where wrapped moth keepers drop a pale silk.
That silk upgrades the Gloamweave Tunic until it glows in the dark.</p>
<p>My favourite detail is a consumable called Sword in the Stone &ndash; its recipe is sold by a merchant on an airship.
Like most of the game, it rewards patience over reflexes.</p>
<p>Verdict: 8/10. Read more of our reviews of games set in Paris or anywhere else.</p>
</article>
<footer><a href="/privacy">Privacy Policy</a> &middot; Click here to subscribe &middot; &copy; 2023</footer>
</body></html>""",
        "answer_key": ["Lanternfall", "Quillmoth Studio", "Mirestep Caverns", "Gloamweave Tunic",
                       "Sword in the Stone"],
    },
    "https://kg-m3.mock/material/honey": {
        "content_type": "text/html",
        "html": """<html><head><title>Honey density</title></head><body>
<h1>Honey density</h1>
<p>The density of honey is about 1415 kg/m3, ranging from 1380 to 1450 kg/m3 at 20 &deg;C depending on water content.</p>
<p>Converted to other units, honey weighs roughly 1.4 g/cm3.</p>
</body></html>""",
    },
    "https://chem-textbook.mock/introductory-chemistry/a-description-of-matter/": {
        "content_type": "text/html",
        "html": """<html><head><title>A Description of Matter</title><script>track('page')</script></head><body>
<h1>A Description of Matter</h1>
<p>Density is the mass of a substance divided by its volume.</p>
<table><caption>Table 1.1 Densities of Common Substances at 25 &deg;C</caption>
<tr><th>Substance</th><th>Density (g/cm&sup3;)</th></tr>
<tr><td>Water</td><td>1.000</td></tr>
<tr><td>Honey</td><td>1.420 g/cm&sup3;</td></tr>
<tr><td>Mayonnaise</td><td>0.910 g/cm&sup3;</td></tr>
<tr><td>Olive oil</td><td>0.918 g/cm&sup3;</td></tr>
</table>
<p>The values in the table are for 25 &deg;C and are used in the exercises that follow.</p>
</body></html>""",
    },
    "https://chem-textbook.mock/mayonnaise-density": {
        "content_type": "text/html",
        "html": """<html><body><h1>Mayonnaise density</h1>
<p>Mayonnaise has a density of about 910 kg/m3, or 0.910 g/cm3, at room temperature.</p></body></html>""",
    },
}

search = [
    {"keywords": ["honey"], "hits": [
        {"title": "Honey density", "link": "https://kg-m3.mock/material/honey",
         "snippet": "The density of honey is about 1415 kg/m3, ranging from 1380 to 1450 kg/m3 at 20 °C."},
        {"title": "A Description of Matter - Introductory Chemistry",
         "link": "https://chem-textbook.mock/introductory-chemistry/a-description-of-matter/",
         "snippet": "Table 1.1 Densities of Common Substances at 25 °C lists water, honey, mayonnaise and olive oil."},
        {"title": "Mayonnaise density", "link": "https://chem-textbook.mock/mayonnaise-density",
         "snippet": "Mayonnaise has a density of about 910 kg/m3 at room temperature."},
    ]},
    {"keywords": ["mayonnaise"], "hits": [
        {"title": "Mayonnaise density", "link": "https://chem-textbook.mock/mayonnaise-density",
         "snippet": "Mayonnaise has a density of about 910 kg/m3 at room temperature."},
        {"title": "A Description of Matter - Introductory Chemistry",
         "link": "https://chem-textbook.mock/introductory-chemistry/a-description-of-matter/",
         "snippet": "Table 1.1 Densities of Common Substances at 25 °C lists water, honey, mayonnaise and olive oil."},
    ]},
]

world = {"nouns": nouns, "entities": E, "pages": pages, "search": search,
         "famous_relations": {
             "UNESCO": "{name} was listed in a UNESCO regional heritage survey",
             "Paris": "{name} once held a small exhibition in Paris",
             "Google": "{name} digitized part of its catalogue with help from Google",
             "BBC": "{name} was featured in a short BBC radio segment",
             "NASA": "{name} borrowed archival photographs from NASA",
             "European Union": "{name} received a modest cultural grant from the European Union",
             "Mozilla": "{name} hosted a volunteer workshop sponsored by Mozilla",
             "Wikipedia": "{name} has a short stub article on Wikipedia",
         }}

out = ROOT / "data" / "mock_world.json"
out.write_text(json.dumps(world, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
print(out, out.stat().st_size)
