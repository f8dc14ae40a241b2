# Generated by scripts/gen_unicode_blocks.py -- do not edit.
# Source: Unicode Character Database Blocks-17.0.0.txt

UNICODE_VERSION = "17.0.0"

# Sorted block start codepoints; BLOCK_NAMES[i] covers
# [BLOCK_STARTS[i], BLOCK_STARTS[i + 1]).
BLOCK_STARTS = (
    0x0000,
    0x0080,
    0x0100,
    0x0180,
    0x0250,
    0x02B0,
    0x0300,
    0x0370,
    0x0400,
    0x0500,
    0x0530,
    0x0590,
    0x0600,
    0x0700,
    0x0750,
    0x0780,
    0x07C0,
    0x0800,
    0x0840,
    0x0860,
    0x0870,
    0x08A0,
    0x0900,
    0x0980,
    0x0A00,
    0x0A80,
    0x0B00,
    0x0B80,
    0x0C00,
    0x0C80,
    0x0D00,
    0x0D80,
    0x0E00,
    0x0E80,
    0x0F00,
    0x1000,
    0x10A0,
    0x1100,
    0x1200,
    0x1380,
    0x13A0,
    0x1400,
    0x1680,
    0x16A0,
    0x1700,
    0x1720,
    0x1740,
    0x1760,
    0x1780,
    0x1800,
    0x18B0,
    0x1900,
    0x1950,
    0x1980,
    0x19E0,
    0x1A00,
    0x1A20,
    0x1AB0,
    0x1B00,
    0x1B80,
    0x1BC0,
    0x1C00,
    0x1C50,
    0x1C80,
    0x1C90,
    0x1CC0,
    0x1CD0,
    0x1D00,
    0x1D80,
    0x1DC0,
    0x1E00,
    0x1F00,
    0x2000,
    0x2070,
    0x20A0,
    0x20D0,
    0x2100,
    0x2150,
    0x2190,
    0x2200,
    0x2300,
    0x2400,
    0x2440,
    0x2460,
    0x2500,
    0x2580,
    0x25A0,
    0x2600,
    0x2700,
    0x27C0,
    0x27F0,
    0x2800,
    0x2900,
    0x2980,
    0x2A00,
    0x2B00,
    0x2C00,
    0x2C60,
    0x2C80,
    0x2D00,
    0x2D30,
    0x2D80,
    0x2DE0,
    0x2E00,
    0x2E80,
    0x2F00,
    0x2FE0,
    0x2FF0,
    0x3000,
    0x3040,
    0x30A0,
    0x3100,
    0x3130,
    0x3190,
    0x31A0,
    0x31C0,
    0x31F0,
    0x3200,
    0x3300,
    0x3400,
    0x4DC0,
    0x4E00,
    0xA000,
    0xA490,
    0xA4D0,
    0xA500,
    0xA640,
    0xA6A0,
    0xA700,
    0xA720,
    0xA800,
    0xA830,
    0xA840,
    0xA880,
    0xA8E0,
    0xA900,
    0xA930,
    0xA960,
    0xA980,
    0xA9E0,
    0xAA00,
    0xAA60,
    0xAA80,
    0xAAE0,
    0xAB00,
    0xAB30,
    0xAB70,
    0xABC0,
    0xAC00,
    0xD7B0,
    0xD800,
    0xDB80,
    0xDC00,
    0xE000,
    0xF900,
    0xFB00,
    0xFB50,
    0xFE00,
    0xFE10,
    0xFE20,
    0xFE30,
    0xFE50,
    0xFE70,
    0xFF00,
    0xFFF0,
    0x10000,
    0x10080,
    0x10100,
    0x10140,
    0x10190,
    0x101D0,
    0x10200,
    0x10280,
    0x102A0,
    0x102E0,
    0x10300,
    0x10330,
    0x10350,
    0x10380,
    0x103A0,
    0x103E0,
    0x10400,
    0x10450,
    0x10480,
    0x104B0,
    0x10500,
    0x10530,
    0x10570,
    0x105C0,
    0x10600,
    0x10780,
    0x107C0,
    0x10800,
    0x10840,
    0x10860,
    0x10880,
    0x108B0,
    0x108E0,
    0x10900,
    0x10920,
    0x10940,
    0x10960,
    0x10980,
    0x109A0,
    0x10A00,
    0x10A60,
    0x10A80,
    0x10AA0,
    0x10AC0,
    0x10B00,
    0x10B40,
    0x10B60,
    0x10B80,
    0x10BB0,
    0x10C00,
    0x10C50,
    0x10C80,
    0x10D00,
    0x10D40,
    0x10D90,
    0x10E60,
    0x10E80,
    0x10EC0,
    0x10F00,
    0x10F30,
    0x10F70,
    0x10FB0,
    0x10FE0,
    0x11000,
    0x11080,
    0x110D0,
    0x11100,
    0x11150,
    0x11180,
    0x111E0,
    0x11200,
    0x11250,
    0x11280,
    0x112B0,
    0x11300,
    0x11380,
    0x11400,
    0x11480,
    0x114E0,
    0x11580,
    0x11600,
    0x11660,
    0x11680,
    0x116D0,
    0x11700,
    0x11750,
    0x11800,
    0x11850,
    0x118A0,
    0x11900,
    0x11960,
    0x119A0,
    0x11A00,
    0x11A50,
    0x11AB0,
    0x11AC0,
    0x11B00,
    0x11B60,
    0x11B80,
    0x11BC0,
    0x11C00,
    0x11C70,
    0x11CC0,
    0x11D00,
    0x11D60,
    0x11DB0,
    0x11DF0,
    0x11EE0,
    0x11F00,
    0x11F60,
    0x11FB0,
    0x11FC0,
    0x12000,
    0x12400,
    0x12480,
    0x12550,
    0x12F90,
    0x13000,
    0x13430,
    0x13460,
    0x14400,
    0x14680,
    0x16100,
    0x16140,
    0x16800,
    0x16A40,
    0x16A70,
    0x16AD0,
    0x16B00,
    0x16B90,
    0x16D40,
    0x16D80,
    0x16E40,
    0x16EA0,
    0x16EE0,
    0x16F00,
    0x16FA0,
    0x16FE0,
    0x17000,
    0x18800,
    0x18B00,
    0x18D00,
    0x18D80,
    0x18E00,
    0x1AFF0,
    0x1B000,
    0x1B100,
    0x1B130,
    0x1B170,
    0x1B300,
    0x1BC00,
    0x1BCA0,
    0x1BCB0,
    0x1CC00,
    0x1CEC0,
    0x1CF00,
    0x1CFD0,
    0x1D000,
    0x1D100,
    0x1D200,
    0x1D250,
    0x1D2C0,
    0x1D2E0,
    0x1D300,
    0x1D360,
    0x1D380,
    0x1D400,
    0x1D800,
    0x1DAB0,
    0x1DF00,
    0x1E000,
    0x1E030,
    0x1E090,
    0x1E100,
    0x1E150,
    0x1E290,
    0x1E2C0,
    0x1E300,
    0x1E4D0,
    0x1E500,
    0x1E5D0,
    0x1E600,
    0x1E6C0,
    0x1E700,
    0x1E7E0,
    0x1E800,
    0x1E8E0,
    0x1E900,
    0x1E960,
    0x1EC70,
    0x1ECC0,
    0x1ED00,
    0x1ED50,
    0x1EE00,
    0x1EF00,
    0x1F000,
    0x1F030,
    0x1F0A0,
    0x1F100,
    0x1F200,
    0x1F300,
    0x1F600,
    0x1F650,
    0x1F680,
    0x1F700,
    0x1F780,
    0x1F800,
    0x1F900,
    0x1FA00,
    0x1FA70,
    0x1FB00,
    0x1FC00,
    0x20000,
    0x2A6E0,
    0x2A700,
    0x2B740,
    0x2B820,
    0x2CEB0,
    0x2EBF0,
    0x2EE60,
    0x2F800,
    0x2FA20,
    0x30000,
    0x31350,
    0x323B0,
    0x33480,
    0xE0000,
    0xE0080,
    0xE0100,
    0xE01F0,
    0xF0000,
    0x100000,
)

BLOCK_NAMES = (
    'Basic Latin',
    'Latin-1 Supplement',
    'Latin Extended-A',
    'Latin Extended-B',
    'IPA Extensions',
    'Spacing Modifier Letters',
    'Combining Diacritical Marks',
    'Greek and Coptic',
    'Cyrillic',
    'Cyrillic Supplement',
    'Armenian',
    'Hebrew',
    'Arabic',
    'Syriac',
    'Arabic Supplement',
    'Thaana',
    'NKo',
    'Samaritan',
    'Mandaic',
    'Syriac Supplement',
    'Arabic Extended-B',
    'Arabic Extended-A',
    'Devanagari',
    'Bengali',
    'Gurmukhi',
    'Gujarati',
    'Oriya',
    'Tamil',
    'Telugu',
    'Kannada',
    'Malayalam',
    'Sinhala',
    'Thai',
    'Lao',
    'Tibetan',
    'Myanmar',
    'Georgian',
    'Hangul Jamo',
    'Ethiopic',
    'Ethiopic Supplement',
    'Cherokee',
    'Unified Canadian Aboriginal Syllabics',
    'Ogham',
    'Runic',
    'Tagalog',
    'Hanunoo',
    'Buhid',
    'Tagbanwa',
    'Khmer',
    'Mongolian',
    'Unified Canadian Aboriginal Syllabics Extended',
    'Limbu',
    'Tai Le',
    'New Tai Lue',
    'Khmer Symbols',
    'Buginese',
    'Tai Tham',
    'Combining Diacritical Marks Extended',
    'Balinese',
    'Sundanese',
    'Batak',
    'Lepcha',
    'Ol Chiki',
    'Cyrillic Extended-C',
    'Georgian Extended',
    'Sundanese Supplement',
    'Vedic Extensions',
    'Phonetic Extensions',
    'Phonetic Extensions Supplement',
    'Combining Diacritical Marks Supplement',
    'Latin Extended Additional',
    'Greek Extended',
    'General Punctuation',
    'Superscripts and Subscripts',
    'Currency Symbols',
    'Combining Diacritical Marks for Symbols',
    'Letterlike Symbols',
    'Number Forms',
    'Arrows',
    'Mathematical Operators',
    'Miscellaneous Technical',
    'Control Pictures',
    'Optical Character Recognition',
    'Enclosed Alphanumerics',
    'Box Drawing',
    'Block Elements',
    'Geometric Shapes',
    'Miscellaneous Symbols',
    'Dingbats',
    'Miscellaneous Mathematical Symbols-A',
    'Supplemental Arrows-A',
    'Braille Patterns',
    'Supplemental Arrows-B',
    'Miscellaneous Mathematical Symbols-B',
    'Supplemental Mathematical Operators',
    'Miscellaneous Symbols and Arrows',
    'Glagolitic',
    'Latin Extended-C',
    'Coptic',
    'Georgian Supplement',
    'Tifinagh',
    'Ethiopic Extended',
    'Cyrillic Extended-A',
    'Supplemental Punctuation',
    'CJK Radicals Supplement',
    'Kangxi Radicals',
    'No_Block',
    'Ideographic Description Characters',
    'CJK Symbols and Punctuation',
    'Hiragana',
    'Katakana',
    'Bopomofo',
    'Hangul Compatibility Jamo',
    'Kanbun',
    'Bopomofo Extended',
    'CJK Strokes',
    'Katakana Phonetic Extensions',
    'Enclosed CJK Letters and Months',
    'CJK Compatibility',
    'CJK Unified Ideographs Extension A',
    'Yijing Hexagram Symbols',
    'CJK Unified Ideographs',
    'Yi Syllables',
    'Yi Radicals',
    'Lisu',
    'Vai',
    'Cyrillic Extended-B',
    'Bamum',
    'Modifier Tone Letters',
    'Latin Extended-D',
    'Syloti Nagri',
    'Common Indic Number Forms',
    'Phags-pa',
    'Saurashtra',
    'Devanagari Extended',
    'Kayah Li',
    'Rejang',
    'Hangul Jamo Extended-A',
    'Javanese',
    'Myanmar Extended-B',
    'Cham',
    'Myanmar Extended-A',
    'Tai Viet',
    'Meetei Mayek Extensions',
    'Ethiopic Extended-A',
    'Latin Extended-E',
    'Cherokee Supplement',
    'Meetei Mayek',
    'Hangul Syllables',
    'Hangul Jamo Extended-B',
    'High Surrogates',
    'High Private Use Surrogates',
    'Low Surrogates',
    'Private Use Area',
    'CJK Compatibility Ideographs',
    'Alphabetic Presentation Forms',
    'Arabic Presentation Forms-A',
    'Variation Selectors',
    'Vertical Forms',
    'Combining Half Marks',
    'CJK Compatibility Forms',
    'Small Form Variants',
    'Arabic Presentation Forms-B',
    'Halfwidth and Fullwidth Forms',
    'Specials',
    'Linear B Syllabary',
    'Linear B Ideograms',
    'Aegean Numbers',
    'Ancient Greek Numbers',
    'Ancient Symbols',
    'Phaistos Disc',
    'No_Block',
    'Lycian',
    'Carian',
    'Coptic Epact Numbers',
    'Old Italic',
    'Gothic',
    'Old Permic',
    'Ugaritic',
    'Old Persian',
    'No_Block',
    'Deseret',
    'Shavian',
    'Osmanya',
    'Osage',
    'Elbasan',
    'Caucasian Albanian',
    'Vithkuqi',
    'Todhri',
    'Linear A',
    'Latin Extended-F',
    'No_Block',
    'Cypriot Syllabary',
    'Imperial Aramaic',
    'Palmyrene',
    'Nabataean',
    'No_Block',
    'Hatran',
    'Phoenician',
    'Lydian',
    'Sidetic',
    'No_Block',
    'Meroitic Hieroglyphs',
    'Meroitic Cursive',
    'Kharoshthi',
    'Old South Arabian',
    'Old North Arabian',
    'No_Block',
    'Manichaean',
    'Avestan',
    'Inscriptional Parthian',
    'Inscriptional Pahlavi',
    'Psalter Pahlavi',
    'No_Block',
    'Old Turkic',
    'No_Block',
    'Old Hungarian',
    'Hanifi Rohingya',
    'Garay',
    'No_Block',
    'Rumi Numeral Symbols',
    'Yezidi',
    'Arabic Extended-C',
    'Old Sogdian',
    'Sogdian',
    'Old Uyghur',
    'Chorasmian',
    'Elymaic',
    'Brahmi',
    'Kaithi',
    'Sora Sompeng',
    'Chakma',
    'Mahajani',
    'Sharada',
    'Sinhala Archaic Numbers',
    'Khojki',
    'No_Block',
    'Multani',
    'Khudawadi',
    'Grantha',
    'Tulu-Tigalari',
    'Newa',
    'Tirhuta',
    'No_Block',
    'Siddham',
    'Modi',
    'Mongolian Supplement',
    'Takri',
    'Myanmar Extended-C',
    'Ahom',
    'No_Block',
    'Dogra',
    'No_Block',
    'Warang Citi',
    'Dives Akuru',
    'No_Block',
    'Nandinagari',
    'Zanabazar Square',
    'Soyombo',
    'Unified Canadian Aboriginal Syllabics Extended-A',
    'Pau Cin Hau',
    'Devanagari Extended-A',
    'Sharada Supplement',
    'No_Block',
    'Sunuwar',
    'Bhaiksuki',
    'Marchen',
    'No_Block',
    'Masaram Gondi',
    'Gunjala Gondi',
    'Tolong Siki',
    'No_Block',
    'Makasar',
    'Kawi',
    'No_Block',
    'Lisu Supplement',
    'Tamil Supplement',
    'Cuneiform',
    'Cuneiform Numbers and Punctuation',
    'Early Dynastic Cuneiform',
    'No_Block',
    'Cypro-Minoan',
    'Egyptian Hieroglyphs',
    'Egyptian Hieroglyph Format Controls',
    'Egyptian Hieroglyphs Extended-A',
    'Anatolian Hieroglyphs',
    'No_Block',
    'Gurung Khema',
    'No_Block',
    'Bamum Supplement',
    'Mro',
    'Tangsa',
    'Bassa Vah',
    'Pahawh Hmong',
    'No_Block',
    'Kirat Rai',
    'No_Block',
    'Medefaidrin',
    'Beria Erfe',
    'No_Block',
    'Miao',
    'No_Block',
    'Ideographic Symbols and Punctuation',
    'Tangut',
    'Tangut Components',
    'Khitan Small Script',
    'Tangut Supplement',
    'Tangut Components Supplement',
    'No_Block',
    'Kana Extended-B',
    'Kana Supplement',
    'Kana Extended-A',
    'Small Kana Extension',
    'Nushu',
    'No_Block',
    'Duployan',
    'Shorthand Format Controls',
    'No_Block',
    'Symbols for Legacy Computing Supplement',
    'Miscellaneous Symbols Supplement',
    'Znamenny Musical Notation',
    'No_Block',
    'Byzantine Musical Symbols',
    'Musical Symbols',
    'Ancient Greek Musical Notation',
    'No_Block',
    'Kaktovik Numerals',
    'Mayan Numerals',
    'Tai Xuan Jing Symbols',
    'Counting Rod Numerals',
    'No_Block',
    'Mathematical Alphanumeric Symbols',
    'Sutton SignWriting',
    'No_Block',
    'Latin Extended-G',
    'Glagolitic Supplement',
    'Cyrillic Extended-D',
    'No_Block',
    'Nyiakeng Puachue Hmong',
    'No_Block',
    'Toto',
    'Wancho',
    'No_Block',
    'Nag Mundari',
    'No_Block',
    'Ol Onal',
    'No_Block',
    'Tai Yo',
    'No_Block',
    'Ethiopic Extended-B',
    'Mende Kikakui',
    'No_Block',
    'Adlam',
    'No_Block',
    'Indic Siyaq Numbers',
    'No_Block',
    'Ottoman Siyaq Numbers',
    'No_Block',
    'Arabic Mathematical Alphabetic Symbols',
    'No_Block',
    'Mahjong Tiles',
    'Domino Tiles',
    'Playing Cards',
    'Enclosed Alphanumeric Supplement',
    'Enclosed Ideographic Supplement',
    'Miscellaneous Symbols and Pictographs',
    'Emoticons',
    'Ornamental Dingbats',
    'Transport and Map Symbols',
    'Alchemical Symbols',
    'Geometric Shapes Extended',
    'Supplemental Arrows-C',
    'Supplemental Symbols and Pictographs',
    'Chess Symbols',
    'Symbols and Pictographs Extended-A',
    'Symbols for Legacy Computing',
    'No_Block',
    'CJK Unified Ideographs Extension B',
    'No_Block',
    'CJK Unified Ideographs Extension C',
    'CJK Unified Ideographs Extension D',
    'CJK Unified Ideographs Extension E',
    'CJK Unified Ideographs Extension F',
    'CJK Unified Ideographs Extension I',
    'No_Block',
    'CJK Compatibility Ideographs Supplement',
    'No_Block',
    'CJK Unified Ideographs Extension G',
    'CJK Unified Ideographs Extension H',
    'CJK Unified Ideographs Extension J',
    'No_Block',
    'Tags',
    'No_Block',
    'Variation Selectors Supplement',
    'No_Block',
    'Supplementary Private Use Area-A',
    'Supplementary Private Use Area-B',
)
