#!/usr/bin/env python3
"""Generate the annotated reference corpus used by the tests.

Writes one <r>...</r> fragment per line. The output is deterministic for a
given seed and is checked in under crates/core/tests/fixtures/.
"""
import random
import sys
from xml.sax.saxutils import escape

SEED = 20170601

SURNAMES = """Иванов Петров Сидоров Смирнов Кузнецов Попов Васильев Соколов Михайлов Новиков
Федоров Морозов Волков Алексеев Лебедев Семенов Егоров Павлов Козлов Степанов Никитин
Захаров Зайцев Борисов Яковлев Григорьев Романов Сорокин Ковалев Белов Медведев Антонов
Тарасов Баранов Богданов Осипов Матвеев Титов Марков Миронов Крылов Карпов Власов
Гордиенко Шевченко Бондаренко Коваленко Ткаченко Лысенко Руденко Кравчук Бойко
Вишневский Успенский Покровский Троицкий Садовский Островский Дашевский
Абалкин Глазьев Ясин Гурвич Полтерович Клейнер Маевский Некипелов Аганбегян Гранберг
Шаститко Аузан Радаев Кузьминов Мау Гринберг Дементьев Сухарев Хлопин Лившиц
Рудаков Шмелев Цапин Бессонов Суворов Анчишкин Ивантер Узяков Широв Ханин""".split()

FEMALE = {"ов": "ова", "ев": "ева", "ин": "ина", "ский": "ская", "цкий": "цкая"}

INITIALS = list("АБВГДЕИКЛМНОПРСТФЭЮЯ")

TITLE_WORDS = """развитие анализ проблемы методы модели управления экономики региона рынка
труда инновационной деятельности предприятий оценка эффективности инвестиционных проектов
финансовой системы банковского сектора государственного регулирования конкуренции
социальной политики образования здравоохранения промышленности сельского хозяйства
современной России институциональные изменения теория практика исследование опыт
стратегии устойчивого роста доходов населения бюджетной политики налоговой системы
малого бизнеса внешней торговли цифровой трансформации человеческого капитала
производительности научных организаций интеграции реформы структурные сдвиги динамика
факторы условия механизмы""".split()

FIRST_WORDS = """Развитие Анализ Проблемы Методы Модели Оценка Теория Исследование Опыт
Стратегии Механизмы Факторы Динамика Реформы Особенности Вопросы Роль Влияние
Эволюция Трансформация Прогнозирование Моделирование""".split()

CITIES = [("М.", "Москва"), ("СПб.", "Санкт-Петербург"), ("Новосибирск", None),
          ("Екатеринбург", None), ("Казань", None), ("Л.", None), ("Томск", None)]
PUBLISHERS = ["Наука", "Экономика", "Дело", "Юрайт", "Инфра-М", "Питер", "Изд-во МГУ",
              "Издат. дом ВШЭ", "Логос", "Статут", "Норма", "Академический проект"]
JOURNALS = ["Вопросы экономики", "Экономический журнал ВШЭ", "Проблемы прогнозирования",
            "Экономика и математические методы", "Вестник МГУ", "Российский журнал менеджмента",
            "Журнал институциональных исследований", "Экономическая политика",
            "Мир России", "Социологические исследования", "Практическая онкология",
            "Общество и экономика", "Вестник СПбГУ. Экономика", "Регион: экономика и социология",
            "Terra Economicus", "ЭКО", "Финансы и кредит", "Деньги и кредит"]

EN_SURNAMES = """Smith Brown Johnson Williams Jones Miller Davis Wilson Anderson Taylor Thomas
Moore Martin Jackson Thompson White Harris Clark Lewis Robinson Walker Young Allen King
Wright Scott Green Baker Adams Nelson Hill Campbell Mitchell Roberts Carter Phillips Evans
Turner Parker Collins Edwards Stewart Morris Murphy Cook Rogers Morgan Cooper Peterson""".split()
EN_WORDS = """open data research information systems citation analysis digital libraries
economic growth market structure innovation policy labor productivity institutions trade
networks knowledge management evaluation metrics scholarly communication repositories
semantic linkage science impact indicators transition economies financial development
human capital regional inequality public sector reform""".split()
EN_JOURNALS = ["Journal of Informetrics", "Scientometrics", "Research Policy",
               "Journal of Economic Perspectives", "American Economic Review",
               "Journal of Comparative Economics", "Economics of Transition",
               "Information Processing and Management", "D-Lib Magazine",
               "Journal of Documentation", "Library Hi Tech", "World Development"]


def female(name):
    for m, f in FEMALE.items():
        if name.endswith(m):
            return name[: -len(m)] + f
    return name


def initials(rng):
    n = rng.choice([1, 2, 2, 2])
    letters = [rng.choice(INITIALS) + "." for _ in range(n)]
    if n == 2 and rng.random() < 0.2:
        return " ".join(letters)
    return "".join(letters)


def ru_author(rng):
    name = rng.choice(SURNAMES)
    if rng.random() < 0.3:
        name = female(name)
    return name, initials(rng)


def ru_title(rng):
    n = rng.randint(2, 9)
    words = [rng.choice(FIRST_WORDS)] + [rng.choice(TITLE_WORDS) for _ in range(n - 1)]
    r = rng.random()
    if r < 0.12:
        words.insert(rng.randint(1, len(words)), ":")
        words.extend(rng.choice(TITLE_WORDS) for _ in range(rng.randint(1, 3)))
    elif r < 0.2:
        words.extend(["в", rng.choice(["XIX", "XX", "XVIII", "XII-XVI"]), "веке"])
    elif r < 0.26:
        words.extend(["в", str(rng.randint(1990, 2015)), "году"])
    elif r < 0.32:
        words.extend(["(на", "примере", rng.choice(["Москвы)", "региона)", "отрасли)"])])
    out = " ".join(words)
    return out.replace(" :", ":") if rng.random() < 0.5 else out


def year(rng):
    return str(rng.randint(1965, 2017))


def dash(rng, style):
    return {"en": "– ", "hy": "- ", "tight": "-", "none": ""}[style]


def author_block(rng, k, fmt="ru"):
    """Return annotated author markup and plain list of (surname, initials)."""
    people = [ru_author(rng) for _ in range(k)]
    spans = []
    for i, (s, ini) in enumerate(people):
        text = f"{s} {ini}" + ("," if i + 1 < k else "")
        spans.append(f"<a>{escape(text)}</a>")
    return " ".join(spans), people


def ru_book(rng):
    a, people = author_block(rng, rng.choice([1, 1, 1, 2, 3]))
    t = ru_title(rng)
    city = rng.choice(CITIES)[0]
    pub = rng.choice(PUBLISHERS)
    y = year(rng)
    d = rng.choice(["en", "en", "hy"])
    pages = rng.randint(80, 640)
    if rng.random() < 0.3:
        s, ini = people[0]
        resp = f" / {ini} {s}"
        if len(people) > 1:
            resp += " [и др.]"
        return f"<r>{a} <t>{escape(t)}</t>{escape(resp)}. {dash(rng, d)}{city}: {escape(pub)}, <y>{y}.</y> {dash(rng, d)}{pages} с.</r>"
    return f"<r>{a} <t>{escape(t)}.</t> {dash(rng, d)}{city}: {escape(pub)}, <y>{y}.</y> {dash(rng, d)}{pages} с.</r>"


def ru_article(rng):
    a, _ = author_block(rng, rng.choice([1, 1, 2, 2, 3]))
    t = ru_title(rng)
    j = rng.choice(JOURNALS)
    y = year(rng)
    vol = rng.randint(1, 30)
    no = rng.randint(1, 12)
    p1 = rng.randint(3, 200)
    p2 = p1 + rng.randint(5, 30)
    style = rng.random()
    if style < 0.4:
        return f"<r>{a} <t>{escape(t)}</t> // {escape(j)}. – <y>{y}.</y> – Т. {vol}, № {no}. – С. {p1}–{p2}.</r>"
    if style < 0.7:
        return f"<r>{a} <t>{escape(t)}</t> // {escape(j)}. <y>{y}.</y> № {no}. С. {p1}–{p2}.</r>"
    if style < 0.85:
        return f"<r>{a} <t>{escape(t)}</t> // {escape(j)}. -<y>{y}.</y> -Т. {vol}, № {no}. -С. {p1}-{p2}.</r>".replace(
            "-<y>", "<y>-")
    return f"<r>{a} <t>{escape(t)}</t> // {escape(j)}. <y>{y}.</y> Т. {vol}. Вып. {no}. С. {p1}-{p2}.</r>"


def ru_thesis(rng):
    a, _ = author_block(rng, 1)
    t = ru_title(rng)
    y = year(rng)
    kind = rng.choice(["дис. … канд. экон. наук", "автореф. дис. … д-ра экон. наук",
                       "дис. … канд. техн. наук"])
    city = rng.choice(CITIES)[0]
    return f"<r>{a} <t>{escape(t)}</t> : {kind}. – {city}, <y>{y}.</y> – {rng.randint(20, 300)} с.</r>"


def ru_proceedings(rng):
    a, _ = author_block(rng, rng.choice([1, 2]))
    t = ru_title(rng)
    y = year(rng)
    city = rng.choice(CITIES)[0]
    n = rng.randint(2, 20)
    return (f"<r>{a} <t>{escape(t)}</t> // Материалы {n}-й междунар. науч.-практ. конф. "
            f"– {city}, <y>{y}.</y> – С. {rng.randint(5, 400)}.</r>")


def ru_edited(rng):
    t = ru_title(rng)
    s, ini = ru_author(rng)
    city = rng.choice(CITIES)[0]
    y = year(rng)
    return (f"<r><t>{escape(t)}</t> / под ред. {ini} {s}. – {city}: {escape(rng.choice(PUBLISHERS))}, "
            f"<y>{y}.</y> – {rng.randint(100, 500)} с.</r>")


def ru_online(rng):
    a, _ = author_block(rng, 1)
    t = ru_title(rng)
    y = year(rng)
    host = rng.choice(["www.hse.ru", "socionet.ru", "www.cemi.rssi.ru", "elibrary.ru"])
    return (f"<r>{a} <t>{escape(t)}</t> [Электронный ресурс]. – <y>{y}.</y> – URL: "
            f"http://{host}/data/{rng.randint(100, 999)}.pdf (дата обращения: "
            f"{rng.randint(10, 28)}.0{rng.randint(1, 9)}.2016).</r>")


def ru_underblanked(rng):
    a, _ = author_block(rng, rng.choice([2, 3]))
    j = rng.choice(JOURNALS).split()
    y = year(rng)
    first = j[0]
    rest = " ".join(j[1:])
    tail = f" {rest}" if rest else ""
    return (f"<r>{a} и сотр.//{escape(first)}{escape(tail)}. <y>-{y}.</y> -Т. {rng.randint(1, 20)}, "
            f"№ {rng.randint(1, 12)}. -С. {rng.randint(10, 200)}-{rng.randint(201, 300)}.</r>")


def en_title(rng):
    n = rng.randint(3, 9)
    words = [rng.choice(EN_WORDS) for _ in range(n)]
    words[0] = words[0].capitalize()
    if rng.random() < 0.2:
        words.insert(rng.randint(1, len(words) - 1), "on")
    return " ".join(words)


def en_authors(rng, k, comma_style):
    spans = []
    for i in range(k):
        s = rng.choice(EN_SURNAMES)
        ini = rng.choice("ABCDEGHJKLMNPRSTW") + "."
        if rng.random() < 0.3:
            ini += rng.choice("ABCDEGHJKLMNPRSTW") + "."
        text = f"{s}, {ini}" if comma_style else f"{s} {ini}"
        if i + 1 < k:
            text += ","
        spans.append(f"<a>{text}</a>")
    return " ".join(spans)


def en_article(rng):
    k = rng.choice([1, 1, 2, 3])
    t = en_title(rng)
    j = rng.choice(EN_JOURNALS)
    y = year(rng)
    if rng.random() < 0.5:
        a = en_authors(rng, k, False)
        return (f"<r>{a} <t>{escape(t)}.</t> {escape(j)}, <y>{y},</y> vol. {rng.randint(1, 60)}, "
                f"no. {rng.randint(1, 12)}, pp. {rng.randint(1, 300)}-{rng.randint(301, 400)}.</r>")
    a = en_authors(rng, k, True)
    return (f"<r>{a} <y>({y}).</y> <t>{escape(t)}.</t> {escape(j)}, {rng.randint(1, 60)}"
            f"({rng.randint(1, 12)}), {rng.randint(1, 300)}-{rng.randint(301, 400)}.</r>")


def en_proceedings(rng):
    a = en_authors(rng, rng.choice([1, 2]), False)
    t = en_title(rng)
    y = year(rng)
    return (f"<r>{a} <t>{escape(t)}.</t> In the proceedings of the {rng.randint(2, 20)}th "
            f"International Conference on {escape(en_title(rng))}. <y>{y}</y></r>")


FIXED = [
    "<r><a>Гордиенко Э.А.</a> <t>Варлаам Хутынский и архиепископ Антоний в житиях и "
    "мистериях XII-XVI века.</t> – М.; СПб., <y>2010.</y></r>",
    "<r><a>Майстренко Н.А.,</a> <a>Шейко С.Б.,</a> <a>Алентьев А.В.</a> и сотр.//Практическая "
    "онкология. <y>-2008.</y> -Т. 9, № 4. -С. 229-236.</r>",
]


def main():
    rng = random.Random(SEED)
    gens = [(ru_book, 55), (ru_article, 75), (ru_thesis, 12), (ru_proceedings, 18),
            (ru_edited, 12), (ru_online, 10), (ru_underblanked, 6),
            (en_article, 40), (en_proceedings, 10)]
    lines = list(FIXED)
    for g, n in gens:
        lines.extend(g(rng) for _ in range(n))
    head, tail = lines[:2], lines[2:]
    rng.shuffle(tail)
    out = sys.argv[1] if len(sys.argv) > 1 else "annotations.xml"
    with open(out, "w", encoding="utf-8") as f:
        for line in head + tail:
            f.write(line + "\n")
    print(f"wrote {len(lines)} fragments to {out}")


if __name__ == "__main__":
    main()
