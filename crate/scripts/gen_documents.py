#!/usr/bin/env python3
"""Generate the page/item JSON documents used by the CLI tests.

Writes under crates/cli/tests/fixtures/:
  docs/spz/cris2016.json      English paper, "References" list
  docs/spz/ekonomika2017.json Russian paper, "Список литературы" list
  bad/corrupt.json            truncated JSON
  bad/empty_text.json         pages whose items hold only whitespace
  large/report20.json         20 pages, about 3000 items
  collection.jsonl            metadata records for linking

Text is laid out line by line. Items on one line never carry leading or
trailing spaces, so the linearized text is the lines joined with newlines and
offsets can be computed here exactly. Filler text is tuned so that the
English paper's "[4]" starts at code point 3950 and its fourth reference at
27513.
"""
import json
import os
import random
import sys

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "crates", "cli", "tests", "fixtures")
WIDTH = 92
LINES_PER_PAGE = 46

EN_WORDS = """citation data extraction research papers repository metadata analysis
linking references services scholarly communication indexing system users
content open approach semantic information documents authors collection
processing results quality evaluation methods tools archive journals
network statistics identifiers records structure format conversion
text mining publications relationships impact measurement library""".split()

RU_WORDS = """анализ данных цитирования научных статей репозиторий метаданные
исследования ссылки библиографические описания публикаций журналов авторы
система обработки результаты качество оценка методы инструменты архив
структура формат преобразование текст извлечение связи индекс показатели
экономики развития региона модели управления рынка предприятий""".split()

EXACT = {1: "a", 2: "of", 3: "the", 4: "data", 5: "index", 6: "papers", 7: "methods",
         8: "document", 9: "citations", 10: "references", 11: "information", 12: "bibliography"}


def sentence(rng, words, n_min=8, n_max=16):
    n = rng.randint(n_min, n_max)
    ws = [rng.choice(words) for _ in range(n)]
    ws[0] = ws[0].capitalize()
    return " ".join(ws) + "."


def paragraph(rng, words, sentences=4, cites=None):
    parts = []
    for _ in range(sentences):
        s = sentence(rng, words)
        if cites and rng.random() < 0.5:
            s = s[:-1] + " " + cites.pop(0) + "."
        parts.append(s)
    return " ".join(parts)


def wrap(text, width=WIDTH):
    lines, cur = [], ""
    for w in text.split(" "):
        if cur and len(cur) + 1 + len(w) > width:
            lines.append(cur)
            cur = w
        else:
            cur = f"{cur} {w}" if cur else w
    if cur:
        lines.append(cur)
    return lines


def filler_of_length(n):
    """Words joined by spaces, exactly n code points long (n >= 1)."""
    words, remaining = [], n
    while remaining > 0:
        if words:
            remaining -= 1  # the joining space
        # leave room for a space and at least one more letter
        k = remaining if remaining <= 12 else min(12, remaining - 2)
        words.append(EXACT[k])
        remaining -= k
    return " ".join(words)


class Doc:
    def __init__(self):
        self.lines = []  # no empty lines

    def add(self, text):
        assert text and text == text.strip(), repr(text)
        self.lines.append(text)

    def add_wrapped(self, text):
        for l in wrap(text):
            self.add(l)

    def length(self):
        """Code points of the linearized text so far, with the newline that
        will precede the next line."""
        return sum(len(l) for l in self.lines) + len(self.lines)

    def pad_to(self, target, tail_len):
        """Add filler lines so that the next line starts at `target` minus
        `tail_len` code points."""
        need = target - tail_len - self.length()
        assert need >= 0, need
        while need > WIDTH + 1:
            chunk = filler_of_length(WIDTH)
            self.add(chunk.capitalize())
            need -= WIDTH + 1
        if need == 0:
            return
        if need == 1:
            # one newline only: extend the previous line by one character
            self.lines[-1] = self.lines[-1] + "."
            return
        self.add(filler_of_length(need - 1))

    def items(self, rng, head_items=None, cuts=(0, 2)):
        pages = []
        items = list(head_items or [])
        page = 1
        for i, line in enumerate(self.lines):
            if i > 0 and i % LINES_PER_PAGE == 0:
                pages.append({"page": page, "textContent": {"items": items}})
                items = []
                page += 1
            y = 780.0 - 14.0 * (i % LINES_PER_PAGE)
            words = line.split(" ")
            splits = sorted(rng.sample(range(1, len(words)), min(len(words) - 1, rng.randint(*cuts)))) if len(words) > 1 else []
            bounds = [0] + splits + [len(words)]
            x = 56.7
            for a, b in zip(bounds, bounds[1:]):
                s = " ".join(words[a:b])
                w = round(4.9 * len(s), 3)
                items.append({"str": s, "dir": "ltr", "width": w, "height": 10.0,
                              "transform": [10.0, 0, 0, 10.0, round(x, 4), y], "fontName": "g_d0_f1"})
                x += w + 2.5
        pages.append({"page": page, "textContent": {"items": items}})
        return pages

    def text(self, head=""):
        return head + "\n".join(self.lines)


HEADER_ITEMS = [
    {"str": " ", "dir": "ltr", "width": 1.2, "height": 23.04, "transform": [4.8, 0, 0, 4.8, 118.3199, 736.64], "fontName": "g_d0_f1"},
    {"str": "Available online at ", "dir": "ltr", "width": 75.63096, "height": 78.85439999999998, "transform": [8.879999999999999, 0, 0, 8.879999999999999, 182.9868, 788.48], "fontName": "g_d0_f2"},
    {"str": "www.sciencedirect.com", "dir": "ltr", "width": 94.038312, "height": 78.85439999999998, "transform": [8.879999999999999, 0, 0, 8.879999999999999, 258.5376, 788.48], "fontName": "g_d0_f2"},
]
# " " then a newline (different baseline), then the two items joined as-is.
HEADER_TEXT = " \nAvailable online at www.sciencedirect.com"

CRIS_REFS = [
    "Kogalovsky M., Parinov S. Classification of research outputs usage types for a current research information system. Procedia Computer Science, 2014.",
    "Lewison G. Citation indexing and the analysis of research outputs. Scientometrics, 2005, vol. 64, no. 2, pp. 155-170.",
    "Parinov S., Kogalovsky M. Semantic linkages in research information systems as a new data source for scientometric studies. Scientometrics, 2014.",
    "Parinov S. Towards an Open Data on how the Research Data are Used: CRIS CERIF based Approach. In the proceedings of the 12th International Conference on Current Research Information Systems (CRIS 2014). 2014",
    "Preston J. The Future of Academic Research. 2013.",
    "Zhao D., Strotmann A. Analysis and visualization of citation networks. Morgan and Claypool, 2015.",
]

CITE_BEFORE = "forms of the research outputs usage by integrating the semantic linkage technique into CRIS functionality [3],"
CITE_AFTER = ". As a result, a pilot of the open semantically enrichable research information system for researchers [5] has been provided"


def cris2016(rng):
    d = Doc()
    d.add("Towards enriched citation data for research information systems")
    d.add("Abstract")
    d.add_wrapped(paragraph(rng, EN_WORDS, 5, ["[1]", "[2]"]))
    d.add("1. Introduction")
    for _ in range(4):
        d.add_wrapped(paragraph(rng, EN_WORDS, 6, ["[1]", "[6]", "[2]"]))
    # The sentence of interest goes on one line; "[4]" must start at 3950.
    head_len = len(HEADER_TEXT) + 1
    lead = "The pilot extends the"
    line = f"{lead} {CITE_BEFORE} [4]{CITE_AFTER}."
    d.pad_to(3950 - head_len, len(lead) + 1 + len(CITE_BEFORE) + 1)
    d.add(line)
    assert d.text(HEADER_TEXT + "\n").index("[4].") == 3950
    d.add("2. Citation data")
    while d.length() < 27513 - 2500:
        d.add_wrapped(paragraph(rng, EN_WORDS, 5, ["[3]", "[1, 2]", "[5]", "[2-4]", "[6]", "[12]"]))
    # heading and references 1-3 come between the padding and reference 4
    tail = ["References"]
    for i, r in enumerate(CRIS_REFS[:3], 1):
        tail.extend(wrap(f"{i}. {r}"))
    d.pad_to(27513 - head_len, sum(len(l) + 1 for l in tail) + len("4. "))
    for l in tail:
        d.add(l)
    for i, r in enumerate(CRIS_REFS[3:], 4):
        d.add_wrapped(f"{i}. {r}")
    text = d.text(HEADER_TEXT + "\n")
    assert text.index("Parinov S. Towards an Open") == 27513, text.index("Parinov S. Towards an Open")
    return d.items(rng, HEADER_ITEMS)


RU_REFS = [
    "Гордиенко Э.А. Варлаам Хутынский и архиепископ Антоний в житиях и мистериях XII-XVI века. – М.; СПб., 2010.",
    "Майстренко Н.А., Шейко С.Б., Алентьев А.В. и сотр.//Практическая онкология. -2008. -Т. 9, № 4. -С. 229-236.",
    "Иванов И.И., Петров П.П. Развитие инновационной деятельности предприятий // Вопросы экономики. 2015. № 3. С. 10-25.",
    "Сидорова А.В. Оценка эффективности инвестиционных проектов. М.: Экономика, 2012. 240 с.",
    "Kuznetsov A. Regional development models in Russia // Terra Economicus. 2016. Vol. 14, no. 2. P. 45-60.",
    "Козлов Д.С. Модели управления рынка труда региона: монография. Новосибирск: Наука, 2009.",
]


def ekonomika2017(rng):
    d = Doc()
    d.add("Модели развития региональных рынков")
    d.add("Аннотация")
    d.add_wrapped(paragraph(rng, RU_WORDS, 4, ["[1]"]))
    d.add("Введение")
    for _ in range(6):
        d.add_wrapped(paragraph(rng, RU_WORDS, 5, ["[2-3]", "[1, 4]", "[6]", "[15]", "[5]", "[1]"]))
    d.add("Список литературы")
    for i, r in enumerate(RU_REFS, 1):
        d.add_wrapped(f"{i}. {r}")
    return d.items(rng)


def report20(rng):
    d = Doc()
    d.add("Отчет о научно-исследовательской работе")
    refs = 40
    while len(d.lines) < 20 * LINES_PER_PAGE - (refs * 2 + 2):
        n = rng.randint(1, refs)
        d.add_wrapped(paragraph(rng, RU_WORDS, 3, [f"[{n}]", f"[{n}, {max(1, n - 1)}]"]))
    d.add("Литература")
    for i in range(1, refs + 1):
        r = rng.choice(RU_REFS).split(" ", 2)
        d.add_wrapped(f"{i}. {r[0]} {r[1]} {r[2]}")
    return d.items(rng, cuts=(1, 4))


def main():
    rng = random.Random(20170601)
    os.makedirs(os.path.join(ROOT, "docs", "spz"), exist_ok=True)
    os.makedirs(os.path.join(ROOT, "bad"), exist_ok=True)
    os.makedirs(os.path.join(ROOT, "large"), exist_ok=True)

    def dump(rel, pages):
        with open(os.path.join(ROOT, rel), "w", encoding="utf-8") as f:
            json.dump(pages, f, ensure_ascii=False, indent=0)
            f.write("\n")

    dump("docs/spz/cris2016.json", cris2016(rng))
    dump("docs/spz/ekonomika2017.json", ekonomika2017(rng))
    large = report20(rng)
    dump("large/report20.json", large)
    print("large items:", sum(len(p["textContent"]["items"]) for p in large), "pages:", len(large), file=sys.stderr)

    with open(os.path.join(ROOT, "bad", "corrupt.json"), "w", encoding="utf-8") as f:
        f.write('[{"page":1,"textContent":{"items":[{"str":"Introduction","dir":"ltr","transform":[10,0,0,10,56.7,780]},{"str":"The pap')
    dump("bad/empty_text.json", [
        {"page": 1, "textContent": {"items": [{"str": " ", "dir": "ltr", "transform": [10, 0, 0, 10, 56.7, 780]}]}},
        {"page": 2, "textContent": {"items": []}},
    ])

    records = [
        {"handle": "RePEc:rus:mqijxk:34", "authors": ["Parinov, Sergey"],
         "title": "Towards an Open Data on how the Research Data are Used CRIS-CERIF based Approach", "year": "2014"},
        {"handle": "RePEc:rus:mqijxk:29", "authors": ["Parinov, Sergey", "Kogalovsky, Mikhail"],
         "title": "Semantic linkages in research information systems as a new data source for scientometric studies", "year": "2014"},
        {"handle": "RePEc:rus:mqijxk:12", "authors": ["Kogalovsky, Mikhail", "Parinov, Sergey"],
         "title": "Classification of research outputs usage types for a current research information system", "year": "2013"},
        {"handle": "spz:neicon:ecoreg:y:2015:i:3:p:10-25", "authors": ["Иванов Иван Иванович", "Петров Петр Петрович"],
         "title": "Развитие инновационной деятельности предприятий", "year": "2015"},
        {"handle": "spz:neicon:onco:y:2008:i:4:p:229-236", "authors": ["Майстренко Николай Анатольевич"],
         "title": "Хирургическое лечение опухолей", "year": "2008"},
    ]
    with open(os.path.join(ROOT, "collection.jsonl"), "w", encoding="utf-8") as f:
        f.write("# handle, authors, title, year\n")
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
